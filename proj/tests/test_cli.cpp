#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "divtest/io.hpp"

using nlohmann::json;
using divtest::cli::run;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(const std::string& cmd, const json& cfg) {
  std::ostringstream out, err;
  const int code = run(cmd, cfg, out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path scratch() {
  auto dir = std::filesystem::temp_directory_path() / "divtest_cli_test";
  std::filesystem::create_directories(dir);
  return dir;
}

// Drops the leading "# config:" comment of CSV reports.
std::string csv_body(const std::string& s) { return s.substr(s.find('\n') + 1); }

}  // namespace

TEST(Cli, DecideIdenticalSamplesAcceptsNull) {
  const auto dir = scratch();
  divtest::write_sample_file(dir / "x.txt", {0, 1, 1, 2, 0});
  const Result r = call("decide", {{"x_sample", (dir / "x.txt").string()},
                                   {"y_sample", (dir / "x.txt").string()},
                                   {"r", 1e-6}});
  ASSERT_EQ(r.code, 0) << r.err;
  const json rep = json::parse(r.out);
  EXPECT_EQ(rep["decision"], "H0");
  EXPECT_EQ(rep["config"]["command"], "decide");
  EXPECT_EQ(rep["config"]["divergence"], "js");
}

TEST(Cli, DecideDisjointSamplesRejects) {
  const auto dir = scratch();
  divtest::write_sample_file(dir / "a.txt", {0, 0, 0});
  divtest::write_sample_file(dir / "b.txt", {1, 1, 1});
  const Result r = call("decide", {{"x_sample", (dir / "a.txt").string()},
                                   {"y_sample", (dir / "b.txt").string()},
                                   {"r", 0.1}});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(json::parse(r.out)["decision"], "H1");
}

TEST(Cli, SweepCsvContract) {
  const json cfg = {{"P1", {0.5, 0.5}}, {"P2", {0.9, 0.1}}, {"eps", 0.2}, {"n_grid", {20, 40}}};
  const Result a = call("sweep", cfg);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out.rfind("# config: ", 0), 0u);
  const std::string body = csv_body(a.out);
  EXPECT_EQ(body.substr(0, body.find('\n')), "n,exact_neg_log_beta,predicted,residual_over_sqrt_n");
  const Result b = call("sweep", cfg);
  EXPECT_EQ(a.out, b.out);
  const json resolved = json::parse(a.out.substr(10, a.out.find('\n') - 10));
  EXPECT_EQ(resolved["P"], json({0.75, 0.25}));
}

TEST(Cli, InvarianceJsPrintsEighth) {
  const Result r = call("invariance", {{"divergences", {"js"}}, {"num_points", 4}, {"k", 3}, {"seed", 5}});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(csv_body(r.out));
  std::string line;
  std::getline(in, line);
  int rows = 0;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string x; std::getline(ls, x, ',');) f.push_back(x);
    ASSERT_EQ(f.size(), 6u);
    EXPECT_NEAR(std::stod(f[3]), 0.125, 1e-6);
    EXPECT_EQ(f[5], "true");
    ++rows;
  }
  EXPECT_EQ(rows, 4);
}

TEST(Cli, ExactMcAsymptCalibrateGap) {
  const json base = {{"P1", {0.5, 0.5}}, {"P2", {0.9, 0.1}}, {"n", 20}, {"eps", 0.2}};
  const Result e = call("exact", base);
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_TRUE(json::parse(e.out)["errors"].contains("log_beta"));

  json mc = base;
  mc["trials"] = 20000;
  mc["r"] = 0.02;
  const Result m1 = call("mc", mc);
  ASSERT_EQ(m1.code, 0) << m1.err;
  mc["workers"] = 3;
  const Result m2 = call("mc", mc);
  EXPECT_EQ(m1.out, m2.out);

  const Result a = call("asympt", base);
  ASSERT_EQ(a.code, 0);
  EXPECT_NEAR(json::parse(a.out)["prediction"]["bhattacharyya"].get<double>(), 0.11157, 1e-5);

  const Result c = call("calibrate", {{"P", {0.5, 0.5}}, {"n", 1}, {"eps", 0.5}});
  ASSERT_EQ(c.code, 0) << c.err;
  EXPECT_NEAR(json::parse(c.out)["threshold"].get<double>(), std::log(2.0), 1e-15);

  const Result l = call("lemma1", {{"P", {0.5, 0.5}}, {"n_grid", {10, 20}}});
  ASSERT_EQ(l.code, 0) << l.err;
  EXPECT_EQ(csv_body(l.out).substr(0, 10), "n,sup_gap\n");
}

TEST(Cli, ReportFileAndSeedOverride) {
  const auto dir = scratch();
  const auto path = dir / "mc.json";
  std::filesystem::remove(path);
  const Result r = call("mc", {{"P1", {0.5, 0.5}}, {"P2", {0.9, 0.1}}, {"n", 10}, {"r", 0.05},
                               {"trials", 1000}, {"seed", 77}, {"output", path.string()}});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(path);
  const json rep = json::parse(in);
  EXPECT_EQ(rep["type1"]["seed"], 77);
  EXPECT_EQ(rep["config"]["seed"], 77);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(call("exact", {{"P1", {0.5, 0.5}}}).code, 1);
  EXPECT_EQ(call("calibrate", {{"P", {0.5, 0.5}}, {"n", 10}, {"eps", 1.5}}).code, 1);
  EXPECT_EQ(call("asympt", {{"P1", {0.5, 0.5}}, {"P2", {0.9, 0.1}}, {"eps", 0.2}, {"divergence", "bogus"}, {"n", 5}}).code, 1);
  EXPECT_EQ(call("bogus", json::object()).code, 1);
  EXPECT_EQ(call("sweep", json::array()).code, 1);
  EXPECT_EQ(call("calibrate", {{"P", {1, 1, 1, 1}}, {"n", 60}, {"eps", 0.1}}).code, 2);
  EXPECT_EQ(call("decide", {{"x_sample", "/nonexistent/x"}, {"y_sample", "/nonexistent/y"}, {"r", 0.1}}).code, 3);
}
