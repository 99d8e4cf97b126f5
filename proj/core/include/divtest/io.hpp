#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <stdexcept>
#include <string>
#include <vector>

#include "divtest/asymptotics.hpp"
#include "divtest/exact_engine.hpp"
#include "divtest/montecarlo.hpp"
#include "divtest/simplex.hpp"

namespace divtest {

// Raised for unreadable or malformed files.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::json to_json(const Distribution& p);
nlohmann::json to_json(const TypeDistribution& t);
nlohmann::json to_json(const ErrorReport& e);
nlohmann::json to_json(const Prediction& p);
nlohmann::json to_json(const McEstimate& e);

// Accepts a JSON array of nonnegative weights and normalizes it.
Distribution distribution_from_json(const nlohmann::json& j);
TypeDistribution type_from_json(const nlohmann::json& j);

// Newline-delimited integers; blank lines are skipped.
std::vector<int> read_sample_file(const std::filesystem::path& path);
void write_sample_file(const std::filesystem::path& path, const std::vector<int>& sample);

nlohmann::json read_json_file(const std::filesystem::path& path);

// Writes `text` to `path`, or to stdout when path is empty or "-".
void write_text(const std::filesystem::path& path, const std::string& text);

// Shortest decimal that round-trips; inf and nan spelled out.
std::string format_double(double x);

}  // namespace divtest
