#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>

#include "divtest/asymptotics.hpp"
#include "divtest/divergence.hpp"
#include "divtest/exact_engine.hpp"
#include "divtest/io.hpp"
#include "divtest/montecarlo.hpp"
#include "divtest/rng.hpp"

namespace divtest::cli {

namespace {

using nlohmann::json;

const std::vector<std::string> kCommands = {"decide", "calibrate", "exact",      "mc",
                                            "sweep",  "asympt",    "invariance", "lemma1"};

const std::vector<std::string> kDefaultDivergences = {"kl",   "js",   "renyi:0.5",
                                                      "chi2", "sql2", "fdiv:hellinger"};

// Config accessor that records every default it hands out, so the report
// can embed the configuration that actually ran.
class Config {
 public:
  Config(json raw, std::filesystem::path base) : cfg_(std::move(raw)), base_(std::move(base)) {
    if (!cfg_.is_object()) throw std::invalid_argument("config must be a JSON object");
  }

  bool has(const std::string& key) const { return cfg_.contains(key) && !cfg_[key].is_null(); }

  template <typename T>
  T get(const std::string& key) const {
    if (!has(key)) throw std::invalid_argument("config is missing '" + key + "'");
    return cfg_[key].get<T>();
  }

  template <typename T>
  T get_or(const std::string& key, T fallback) {
    if (!has(key)) cfg_[key] = fallback;
    return cfg_[key].get<T>();
  }

  Distribution dist(const std::string& key) const {
    if (!has(key)) throw std::invalid_argument("config is missing '" + key + "'");
    return distribution_from_json(cfg_[key]);
  }

  Distribution dist_or(const std::string& key, const Distribution& fallback) {
    if (!has(key)) cfg_[key] = fallback.vec();
    return distribution_from_json(cfg_[key]);
  }

  DivergenceSpec divergence() { return DivergenceSpec::parse(get_or<std::string>("divergence", "js")); }

  int n() const {
    const int v = get<int>("n");
    if (v < 1) throw std::invalid_argument("n must be positive");
    return v;
  }

  std::vector<int> n_grid() const {
    const auto grid = get<std::vector<int>>("n_grid");
    if (grid.empty()) throw std::invalid_argument("n_grid is empty");
    for (int v : grid)
      if (v < 1) throw std::invalid_argument("n_grid entries must be positive");
    return grid;
  }

  double eps() const {
    const double e = get<double>("eps");
    if (!(e > 0.0 && e < 1.0)) throw std::invalid_argument("eps must lie in (0, 1)");
    return e;
  }

  std::filesystem::path path(const std::string& key) const {
    std::filesystem::path p = get<std::string>(key);
    return p.is_relative() && !base_.empty() ? base_ / p : p;
  }

  EngineOptions engine() {
    EngineOptions o;
    o.pair_budget = get_or<std::uint64_t>("pair_budget", o.pair_budget);
    o.workers = workers_;
    return o;
  }

  McOptions mc() {
    McOptions o;
    o.block_size = get_or<std::uint64_t>("block_size", o.block_size);
    if (o.block_size == 0) throw std::invalid_argument("block_size must be positive");
    o.workers = workers_;
    return o;
  }

  std::uint64_t trials() {
    const auto t = get_or<std::uint64_t>("trials", 100000);
    if (t == 0) throw std::invalid_argument("trials must be positive");
    return t;
  }

  std::uint64_t seed() { return get_or<std::uint64_t>("seed", 1); }

  // Worker count is an execution detail: results do not depend on it, so it
  // is kept out of the embedded config.
  void take_workers() {
    if (has("workers")) workers_ = cfg_["workers"].get<unsigned>();
    cfg_.erase("workers");
  }

  const json& resolved() const { return cfg_; }

 private:
  json cfg_;
  std::filesystem::path base_;
  unsigned workers_ = 0;
};

std::string with_config_comment(const json& resolved, const std::string& csv) {
  return "# config: " + resolved.dump() + "\n" + csv;
}

json finite(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

struct Report {
  std::string text;
  std::string summary;  // echoed to stdout when the report goes to a file
};

Report cmd_decide(Config& c) {
  const DivergenceSpec d = c.divergence();
  const std::vector<int> xs = read_sample_file(c.path("x_sample"));
  const std::vector<int> ys = read_sample_file(c.path("y_sample"));
  if (xs.empty() || ys.empty()) throw std::invalid_argument("sample files must be nonempty");
  int top = 1;
  for (int v : xs) top = std::max(top, v);
  for (int v : ys) top = std::max(top, v);
  const int k = c.get_or<int>("k", top + 1);
  const double r = c.get<double>("r");
  const TypeDistribution tx = type_of_sample(xs, k);
  const TypeDistribution ty = type_of_sample(ys, k);
  const double stat = evaluate(d, tx.frequencies(), ty.frequencies());
  const std::string decision = rejects(stat, r) ? "H1" : "H0";
  json rep = {{"config", c.resolved()},
              {"type_x", to_json(tx)},
              {"type_y", to_json(ty)},
              {"statistic", finite(stat)},
              {"threshold", r},
              {"decision", decision}};
  return {rep.dump(2) + "\n", decision + "\n"};
}

Report cmd_calibrate(Config& c) {
  const DivergenceSpec d = c.divergence();
  const Distribution p = c.dist("P");
  const int n = c.n();
  const double eps = c.eps();
  const std::string method = c.get_or<std::string>("method", "exact");
  json rep;
  if (method == "exact") {
    const StatDistribution law = statistic_distribution(d, p, n, c.engine());
    const double r = calibrate(law, eps);
    const double la = law.log_tail(r);
    rep = {{"threshold", finite(r)}, {"log_alpha", finite(la)}, {"alpha", std::exp(la)}};
    if (p.interior()) {
      if (const auto eta = invariance_constant(d, p)) {
        rep["eta"] = *eta;
        rep["asymptotic_threshold"] = threshold_asymptotic(*eta, static_cast<int>(p.k()), eps, n);
      }
    }
  } else if (method == "mc") {
    const std::uint64_t trials = c.trials();
    const std::uint64_t seed = c.seed();
    const double r = mc_calibrate(d, p, n, eps, trials, seed, c.mc());
    rep = {{"threshold", finite(r)}};
  } else {
    throw std::invalid_argument("method must be 'exact' or 'mc'");
  }
  rep["config"] = c.resolved();
  const std::string threshold = rep["threshold"].dump();
  return {rep.dump(2) + "\n", threshold + "\n"};
}

double threshold_from(Config& c, const DivergenceSpec& d, const Distribution& p0, int n) {
  if (c.has("r")) return c.get<double>("r");
  if (!c.has("eps")) throw std::invalid_argument("config needs 'r' or 'eps'");
  const double r = calibrate_exact(d, p0, n, c.eps(), c.engine());
  return r;
}

Report cmd_exact(Config& c) {
  const DivergenceSpec d = c.divergence();
  const Distribution p1 = c.dist("P1");
  const Distribution p2 = c.dist("P2");
  const Distribution p0 = c.dist_or("P", p1);
  const int n = c.n();
  const double r = threshold_from(c, d, p0, n);
  const EngineOptions eo = c.engine();
  if (c.has("law_output")) {
    std::ostringstream csv;
    statistic_distribution(d, p0, n, eo).write_csv(csv);
    write_text(c.path("law_output"), with_config_comment(c.resolved(), csv.str()));
  }
  const ErrorReport e = exact_errors(d, r, p0, p1, p2, n, eo);
  json rep = {{"config", c.resolved()}, {"errors", to_json(e)}};
  return {rep.dump(2) + "\n", ""};
}

Report cmd_mc(Config& c) {
  const DivergenceSpec d = c.divergence();
  const Distribution p1 = c.dist("P1");
  const Distribution p2 = c.dist("P2");
  const Distribution p0 = c.dist_or("P", p1);
  const int n = c.n();
  const std::uint64_t trials = c.trials();
  const std::uint64_t seed = c.seed();
  const McOptions mo = c.mc();
  double r = 0.0;
  if (c.has("r")) {
    r = c.get<double>("r");
  } else {
    r = mc_calibrate(d, p0, n, c.eps(), trials, seed, mo);
  }
  std::vector<BlockCount> b1;
  std::vector<BlockCount> b2;
  const McEstimate t1 = mc_error(d, r, p0, p0, n, trials, seed, ErrorType::Type1, mo, &b1);
  const McEstimate t2 = mc_error(d, r, p1, p2, n, trials, seed, ErrorType::Type2, mo, &b2);
  for (const auto& [key, blocks] : {std::pair{"type1_blocks_output", &b1},
                                    std::pair{"type2_blocks_output", &b2}}) {
    if (!c.has(key)) continue;
    std::ostringstream csv;
    write_block_csv(csv, *blocks);
    write_text(c.path(key), with_config_comment(c.resolved(), csv.str()));
  }
  json rep = {{"config", c.resolved()},
              {"threshold", finite(r)},
              {"type1", to_json(t1)},
              {"type2", to_json(t2)}};
  return {rep.dump(2) + "\n", ""};
}

Report cmd_sweep(Config& c) {
  const DivergenceSpec d = c.divergence();
  const Distribution p1 = c.dist("P1");
  const Distribution p2 = c.dist("P2");
  const Distribution p0 = c.dist_or("P", p_star(p1, p2));
  const double eps = c.eps();
  const std::vector<int> grid = c.n_grid();
  const EngineOptions eo = c.engine();
  const Prediction pred = prediction(p1, p2, eps);
  std::ostringstream csv;
  csv << "n,exact_neg_log_beta,predicted,residual_over_sqrt_n\n";
  for (int n : grid) {
    const double r = calibrate_exact(d, p0, n, eps, eo);
    const double exact = -exact_type2(d, r, p1, p2, n, eo);
    const double predicted = pred.predicted_neg_log_beta(n);
    const double resid = (exact - predicted) / std::sqrt(static_cast<double>(n));
    csv << n << ',' << format_double(exact) << ',' << format_double(predicted) << ','
        << format_double(resid) << '\n';
  }
  return {with_config_comment(c.resolved(), csv.str()), ""};
}

Report cmd_asympt(Config& c) {
  const Distribution p1 = c.dist("P1");
  const Distribution p2 = c.dist("P2");
  const double eps = c.eps();
  const Prediction pred = prediction(p1, p2, eps);
  const Distribution ps = p_star(p1, p2);
  json rep = {{"p_star", to_json(ps)}, {"prediction", to_json(pred)}};
  if (c.has("n")) {
    const int n = c.n();
    rep["predicted_neg_log_beta"] = pred.predicted_neg_log_beta(n);
    if (c.has("divergence") && ps.interior()) {
      const DivergenceSpec d = c.divergence();
      if (const auto eta = invariance_constant(d, ps)) {
        rep["eta"] = *eta;
        rep["asymptotic_threshold"] = threshold_asymptotic(*eta, pred.k, eps, n);
      }
    }
  }
  rep["config"] = c.resolved();
  return {rep.dump(2) + "\n", ""};
}

Report cmd_invariance(Config& c) {
  const auto names = c.get_or<std::vector<std::string>>("divergences", kDefaultDivergences);
  std::vector<Distribution> points;
  if (c.has("points")) {
    for (const auto& j : c.get<json>("points")) points.push_back(distribution_from_json(j));
  } else {
    const int k = c.get_or<int>("k", 3);
    const int count = c.get_or<int>("num_points", 10);
    if (k < 2 || count < 1) throw std::invalid_argument("need k >= 2 and num_points >= 1");
    RngStream stream(c.seed(), 0);
    std::gamma_distribution<double> gamma(1.0, 1.0);
    for (int i = 0; i < count; ++i) {
      std::vector<double> w(k);
      for (double& x : w) x = gamma(stream);
      points.push_back(make_distribution(w));
    }
  }
  std::ostringstream csv;
  csv << "divergence,point,p,eta,relative_residual,invariant\n";
  for (const std::string& name : names) {
    const DivergenceSpec d = DivergenceSpec::parse(name);
    for (std::size_t i = 0; i < points.size(); ++i) {
      const Distribution& p = points[i];
      const Eigen::MatrixXd a = local_matrix(d, p);
      const Eigen::MatrixXd sigma = sigma_matrix(p);
      const double eta = sigma.ldlt().solve(a).trace() / static_cast<double>(p.k() - 1);
      const double resid = (a - eta * sigma).norm() / a.norm();
      std::string ps;
      for (std::size_t j = 0; j < p.k(); ++j) ps += (j ? ";" : "") + format_double(p[j]);
      csv << d.name() << ',' << i << ',' << ps << ',' << format_double(eta) << ','
          << format_double(resid) << ',' << (invariance_constant(d, p) ? "true" : "false")
          << '\n';
    }
  }
  return {with_config_comment(c.resolved(), csv.str()), ""};
}

Report cmd_lemma1(Config& c) {
  const DivergenceSpec d = c.divergence();
  const Distribution p = c.dist("P");
  const std::vector<int> grid = c.n_grid();
  const std::string method = c.get_or<std::string>("method", "exact");
  if (method != "exact" && method != "mc") throw std::invalid_argument("method must be 'exact' or 'mc'");
  std::ostringstream csv;
  csv << "n,sup_gap\n";
  if (method == "exact") {
    const EngineOptions eo = c.engine();
    for (int n : grid) csv << n << ',' << format_double(lemma1_sup_gap_exact(d, p, n, eo)) << '\n';
  } else {
    const std::uint64_t trials = c.trials();
    const std::uint64_t seed = c.seed();
    const McOptions mo = c.mc();
    for (int n : grid)
      csv << n << ',' << format_double(statistic_ecdf_gap(d, p, n, trials, seed, mo)) << '\n';
  }
  return {with_config_comment(c.resolved(), csv.str()), ""};
}

Report dispatch(const std::string& command, Config& c) {
  if (command == "decide") return cmd_decide(c);
  if (command == "calibrate") return cmd_calibrate(c);
  if (command == "exact") return cmd_exact(c);
  if (command == "mc") return cmd_mc(c);
  if (command == "sweep") return cmd_sweep(c);
  if (command == "asympt") return cmd_asympt(c);
  if (command == "invariance") return cmd_invariance(c);
  if (command == "lemma1") return cmd_lemma1(c);
  throw std::invalid_argument("unknown command '" + command + "'");
}

}  // namespace

int run(const std::string& command, const json& config, std::ostream& out, std::ostream& err,
        const std::filesystem::path& base_dir) {
  try {
    json raw = config;
    if (raw.is_object()) raw["command"] = command;
    Config c(std::move(raw), base_dir);
    c.take_workers();
    const Report rep = dispatch(command, c);
    if (c.has("output") && c.get<std::string>("output") != "-") {
      write_text(c.path("output"), rep.text);
      out << rep.summary;
    } else {
      out << rep.text;
    }
    return kOk;
  } catch (const BudgetExceeded& e) {
    err << "divtest: budget exceeded: " << e.what() << '\n';
    return kBudgetExceeded;
  } catch (const IoError& e) {
    err << "divtest: I/O error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::exception& e) {
    err << "divtest: config error: " << e.what() << '\n';
    return kConfigError;
  }
}

int main_entry(int argc, char** argv) {
  CLI::App app{"Divergence-based two-sample tests on finite alphabets"};
  std::string command;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_path;
  std::optional<unsigned> workers;
  app.add_option("command", command, "Command to run")->required()->check(CLI::IsMember(kCommands));
  app.add_option("--config", config_path, "JSON experiment config")->required();
  app.add_option("--seed", seed, "Override the config seed");
  app.add_option("--out", out_path, "Override the report path ('-' for stdout)");
  app.add_option("--workers", workers, "Worker threads (0 = all cores)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfigError;
  }

  json config;
  try {
    config = read_json_file(config_path);
  } catch (const IoError& e) {
    std::cerr << "divtest: I/O error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::exception& e) {
    std::cerr << "divtest: config error: " << e.what() << '\n';
    return kConfigError;
  }
  if (config.is_object()) {
    if (seed) config["seed"] = *seed;
    if (out_path) config["output"] = *out_path;
    if (workers) config["workers"] = *workers;
  }
  const std::filesystem::path base = std::filesystem::path(config_path).parent_path();
  return run(command, config, std::cout, std::cerr, base);
}

}  // namespace divtest::cli
