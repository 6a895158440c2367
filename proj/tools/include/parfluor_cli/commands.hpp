#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "parfluor_cli/config.hpp"

namespace parfluor::cli {

/// Process exit codes, a stable contract.
enum ExitCode : int {
  kExitOk = 0,
  kExitPartial = 1,
  kExitConfig = 2,
  kExitCompute = 3,
};

struct CommandOutput {
  std::vector<std::filesystem::path> files;
  json summary = json::object();  // merged into the manifest
};

/// Each command writes its files and a <name>.manifest.json into
/// config.output_dir. Library errors propagate.
CommandOutput cmd_phasematch(const RunConfig& config);
CommandOutput cmd_pert_flux(const RunConfig& config);
CommandOutput cmd_wigner(const RunConfig& config);
CommandOutput cmd_calibrate(const RunConfig& config);

/// Runs config.sweep_command for every cell into
/// <output_dir>/cell_NN_theta.._tau.._w../ using up to config.jobs threads,
/// then writes <output_dir>/index.json. Returns kExitOk, or kExitPartial if
/// any cell failed; an empty cell list is a ConfigError.
int cmd_sweep(const RunConfig& config, std::ostream& err);

/// Full command-line entry point.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace parfluor::cli
