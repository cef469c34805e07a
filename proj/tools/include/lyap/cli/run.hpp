#pragma once

// Experiment runner behind lyapctl: a merged JSON parameter set per run,
// dispatched to one of the subcommands, with CSV and JSON results.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace lyap::cli {

inline constexpr std::string_view kConfigSchema = "lyap.config/1";
inline constexpr std::string_view kResultSchema = "lyap.result/1";
inline constexpr std::string_view kRejectionSchema = "lyap.rejection/1";

const std::vector<std::string>& subcommands();

struct ExperimentConfig {
  std::string command;
  nlohmann::json params = nlohmann::json::object();  // config file overlaid with flags
  std::uint64_t seed = 0;
  std::size_t samples = 10000;
  unsigned workers = 1;
  std::string out;      // CSV path; empty writes to the output stream
  std::string summary;  // JSON path; defaults to `out` with a .json extension
  std::string plot;     // optional two-column data file

  /// Reads seed, samples, workers and the paths from `params` and checks
  /// ranges. The seed is mandatory. Throws InvalidInput naming the field.
  static ExperimentConfig from_params(std::string command, nlohmann::json params);
};

/// Parses a config file; it must carry "schema": "lyap.config/1".
/// Syntax errors name the line.
nlohmann::json load_config(const std::string& path);

struct RunOutput {
  std::string csv;
  nlohmann::json summary;
  std::vector<std::pair<double, double>> plot;
  std::optional<nlohmann::json> rejection;  // set when a campaign stopped at a gate
};

/// Runs the subcommand and returns its results. Throws InvalidInput,
/// CapacityError and GateError.
RunOutput execute(const ExperimentConfig& config);

/// execute() plus file output and exit codes: 0 on success, 2 on a gate or
/// precondition rejection (JSON reason on `err`), 1 on any other error.
int run(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

/// Help text listing the CSV columns of a subcommand.
std::string columns_help(std::string_view command);

}  // namespace lyap::cli
