#pragma once

// Runs the tasks of a scenario on a bounded job pool and writes every artifact plus a manifest.

#include <optional>
#include <string>
#include <vector>

#include "hmlab/scenario.hpp"

namespace hmlab {

inline constexpr int kExitPass = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitCheckFailure = 2;

struct RunOptions {
  std::string command = "all";  // subcommand; only tasks with command_of(kind) == command run
  std::optional<std::string> output;
  int jobs = 1;
};

struct TaskOutcome {
  std::string name;
  TaskKind kind = TaskKind::Solve;
  std::string status;  // "ok", "check_failed" or "error"
  std::string error;
  double seconds = 0.0;
  std::vector<std::string> outputs;  // relative to the output directory
  std::vector<EstimateReport> reports;
};

struct RunResult {
  int exit_code = kExitPass;
  std::string output_dir;
  std::vector<TaskOutcome> tasks;
};

// Never throws for task failures; those are recorded per task. Throws IoError when the output
// directory cannot be created and InvalidArgument when no task matches the command.
RunResult run(const Scenario& scenario, const RunOptions& opts = {});

const char* version();

}  // namespace hmlab
