#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace pomdpcs {

inline constexpr const char* kToolVersion = "1.0.0";

enum ExitCode : int { kExitOk = 0, kExitInputError = 1, kExitViolation = 2 };

struct RunConfig {
  std::string command;
  std::vector<std::filesystem::path> models;
  int grid = 0;  // 0 picks a default for the model's state count
  double tol = 1e-8;
  int max_iters = 100'000;
  std::uint64_t seed = 1;
  int paths = 0;  // 0 picks the command default
  std::filesystem::path out;  // empty: $POMDPCS_OUT, then "pomdpcs-out"
  std::vector<std::string> predicates;
  std::vector<double> kappas = {0.001, 0.5, 1.0, 2.0, 7.3};
  int root_degree = 2;
  int action = 1;  // observation matrix used by ultrametric-root
  int workers = 1;
  int count = 50;  // conjecture-probe models
  std::optional<double> threshold;  // qd-simulate; solved for when absent
  std::string baseline = "myopic";  // "myopic" or "constant:<u>"
  int horizon_cap = 10'000;
  double eval_tolerance = 1e-3;
};

const std::vector<std::string>& known_commands();
const std::vector<std::string>& known_predicates();

/// Default grid resolution for X states.
int default_resolution(int num_states);

/// Output directory after applying the environment default.
std::filesystem::path resolve_output_dir(const RunConfig& config);

/// Runs one command, writes its artifacts plus manifest.json, and returns
/// 0 (success), 1 (bad input) or 2 (a verifier found a violation).
/// Diagnostics go to `log`.
int run(const RunConfig& config, std::ostream& log);

}  // namespace pomdpcs
