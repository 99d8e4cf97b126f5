#pragma once

#include <filesystem>
#include <iosfwd>
#include <nlohmann/json.hpp>
#include <string>

namespace divtest::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kBudgetExceeded = 2, kIoError = 3 };

// Executes one command against a JSON experiment config. The report goes to
// config["output"] when set, otherwise to `out`. Relative file names in the
// config resolve against `base_dir`. Diagnostics go to `err`.
int run(const std::string& command, const nlohmann::json& config, std::ostream& out,
        std::ostream& err, const std::filesystem::path& base_dir = {});

// argv front end: divtest <command> --config <file> [--seed N] [--out PATH] [--workers N]
int main_entry(int argc, char** argv);

}  // namespace divtest::cli
