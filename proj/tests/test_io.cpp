#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <limits>

#include "divtest/io.hpp"

using namespace divtest;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("divtest_io_" + name);
}

}  // namespace

TEST(Io, DistributionJsonRoundTrip) {
  const Distribution p({0.25, 0.75});
  const nlohmann::json j = to_json(p);
  ASSERT_TRUE(j.is_array());
  EXPECT_EQ(distribution_from_json(j), p);
  EXPECT_THROW(distribution_from_json(nlohmann::json("x")), std::invalid_argument);
  EXPECT_THROW(distribution_from_json(nlohmann::json::array({1, -1})), std::invalid_argument);
}

TEST(Io, TypeJsonRoundTrip) {
  const TypeDistribution t({3, 0, 2});
  EXPECT_EQ(type_from_json(to_json(t)), t);
  EXPECT_THROW(type_from_json(nlohmann::json::array({1.5, 2})), std::invalid_argument);
}

TEST(Io, SampleFileRoundTrip) {
  const auto path = temp_file("sample.txt");
  const std::vector<int> s = {0, 2, 1, 1, 0};
  write_sample_file(path, s);
  EXPECT_EQ(read_sample_file(path), s);
  std::filesystem::remove(path);
}

TEST(Io, SampleFileToleratesBlankLinesAndRejectsJunk) {
  const auto path = temp_file("junk.txt");
  {
    std::ofstream out(path);
    out << "1\n\n 2 \r\n";
  }
  EXPECT_EQ(read_sample_file(path), (std::vector<int>{1, 2}));
  {
    std::ofstream out(path);
    out << "1\nx\n";
  }
  EXPECT_THROW(read_sample_file(path), IoError);
  std::filesystem::remove(path);
  EXPECT_THROW(read_sample_file(path), IoError);
}

TEST(Io, ReportsCarryIntermediates) {
  const Prediction pr = prediction(Distribution({0.5, 0.5}), Distribution({0.9, 0.1}), 0.2);
  const nlohmann::json j = to_json(pr);
  for (const char* key : {"bhattacharyya", "v1", "v2", "quantile", "first_order", "second_order_coeff"})
    EXPECT_TRUE(j.contains(key)) << key;
  ErrorReport e;
  e.log_alpha = -std::numeric_limits<double>::infinity();
  e.log_beta = -2.0;
  e.n = 4;
  const nlohmann::json je = to_json(e);
  EXPECT_EQ(je["log_alpha"], "-inf");
  EXPECT_EQ(je["alpha"], 0.0);
  EXPECT_DOUBLE_EQ(je["beta"].get<double>(), std::exp(-2.0));
  const nlohmann::json jm = to_json(McEstimate{0.25, 0.01, 100, 9});
  EXPECT_EQ(jm["trials"], 100);
}

TEST(Io, FormatDouble) {
  EXPECT_EQ(format_double(0.5), "0.5");
  EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
  const double x = 0.1 + 0.2;
  EXPECT_EQ(std::stod(format_double(x)), x);
}
