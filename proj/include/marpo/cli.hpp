/// @file cli.hpp
/// @brief Subcommand implementations behind the command-line tool; every
/// artifact is CSV with a fixed header and deterministic number formatting.
#pragma once

#include <cstdint>
#include <string>

#include "marpo/config.hpp"

namespace marpo {

/// Exit codes of the tool.
enum ExitCode {
  kExitOk = 0,
  kExitSolverFailure = 1,
  kExitConfigError = 2,
  kExitCheckFailure = 3,
};

struct CommandFlags {
  std::string param;       // tangent --param
  bool fd_check = false;   // tangent --fd-check
  std::string obs_path;    // identify --obs
  int modes = 4;           // galerkin --modes
  bool compare = false;    // galerkin --compare
  std::string suite = "all";  // check --suite
  std::uint64_t seed = 0;  // check/identify seed
  bool synth = false;      // identify --synth: write observations and exit
  double synth_sigma = 0.0;
};

/// Runs one subcommand against a parsed configuration. Returns an exit code;
/// solver failures flush whatever partial report exists before returning.
int run_command(const std::string& command, const RunConfig& cfg,
                const CommandFlags& flags);

}  // namespace marpo
