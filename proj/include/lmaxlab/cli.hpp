#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lmaxlab/experiments.hpp"
#include "lmaxlab/kernel_operator.hpp"

namespace lmaxlab {

inline constexpr const char* kCodeVersion = "lmaxlab 0.1.0 (philox4x32-10 streams v1)";

enum class ExitCode : int { success = 0, failure = 1, config_error = 2, nonconvergence = 3, inconclusive = 4 };

enum class Command {
  simulate_convergence,
  simulate_fluctuations,
  toeplitz_spectrum,
  kernel_limit,
  support_scan
};

std::string to_string(Command c);
Command parse_command(const std::string& name);

struct Invocation {
  Command command = Command::simulate_convergence;
  std::optional<std::filesystem::path> config_path;
  std::vector<std::string> overrides;  // "key=value", dotted keys
  int workers = 1;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out_dir = ".";
  bool dump_matrices = false;
};

/// Defaults filled in, overrides applied, unknown keys rejected. A file whose
/// top level holds a "config" table (an emitted summary.json) is replayed.
nlohmann::json resolve_config(const Invocation& inv);

// Typed views over a resolved config; throw ConfigError on bad values.
PopulationModel population_from_json(const nlohmann::json& cfg);
ExperimentConfig experiment_from_json(const nlohmann::json& cfg);

/// Dispatches the command and writes its outputs plus summary.json into
/// `out_dir`. Errors are mapped onto exit codes and reported on stderr.
ExitCode run(const Invocation& inv);

}  // namespace lmaxlab
