#include "divtest/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace divtest {

namespace {

// JSON has no infinities; they travel as strings.
nlohmann::json number(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

nlohmann::json to_json(const Distribution& p) { return p.vec(); }

nlohmann::json to_json(const TypeDistribution& t) {
  return std::vector<int>(t.counts().begin(), t.counts().end());
}

nlohmann::json to_json(const ErrorReport& e) {
  return {{"n", e.n},
          {"threshold", number(e.threshold)},
          {"log_alpha", number(e.log_alpha)},
          {"log_beta", number(e.log_beta)},
          {"alpha", std::exp(e.log_alpha)},
          {"beta", std::exp(e.log_beta)},
          {"neg_log_beta_over_n", number(-e.log_beta / e.n)}};
}

nlohmann::json to_json(const Prediction& p) {
  return {{"k", p.k},
          {"eps", p.eps},
          {"bhattacharyya", number(p.bhattacharyya)},
          {"v1", p.v1},
          {"v2", p.v2},
          {"quantile", p.quantile},
          {"first_order", number(p.first_order)},
          {"second_order_coeff", p.second_order_coeff},
          {"degenerate", p.degenerate}};
}

nlohmann::json to_json(const McEstimate& e) {
  return {{"estimate", e.estimate},
          {"std_error", e.std_error},
          {"trials", e.trials},
          {"seed", e.seed}};
}

Distribution distribution_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw std::invalid_argument("distribution must be a JSON array");
  std::vector<double> w;
  for (const auto& v : j) {
    if (!v.is_number()) throw std::invalid_argument("distribution entries must be numbers");
    w.push_back(v.get<double>());
  }
  return make_distribution(w);
}

TypeDistribution type_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw std::invalid_argument("type must be a JSON array");
  std::vector<int> c;
  for (const auto& v : j) {
    if (!v.is_number_integer()) throw std::invalid_argument("type entries must be integers");
    c.push_back(v.get<int>());
  }
  return TypeDistribution(std::move(c));
}

std::vector<int> read_sample_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<int> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    int v = 0;
    const char* b = line.data() + first;
    const char* e = line.data() + last + 1;
    const auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc() || res.ptr != e)
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": not an integer");
    out.push_back(v);
  }
  if (in.bad()) throw IoError("read failed on " + path.string());
  return out;
}

void write_sample_file(const std::filesystem::path& path, const std::vector<int>& sample) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (int v : sample) out << v << '\n';
  if (!out) throw IoError("write failed on " + path.string());
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failed on " + path.string());
}

}  // namespace divtest
