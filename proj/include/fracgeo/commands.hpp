#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "fracgeo/run_config.hpp"

/// Command drivers behind the fracgeo executable. Each run writes its CSV
/// tables and one report.json into the output directory and prints a short
/// summary. Output is deterministic for a fixed config and build.
namespace fracgeo {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitPass = 0, kExitCheckFailed = 1, kExitConfigError = 2 };

/// Runs `cfg.command`. Returns kExitPass when every check passes and
/// kExitCheckFailed on a failed check or a pipeline error (the failing stage
/// is named in the report).
int run_command(const RunConfig& cfg, bool refine, const std::filesystem::path& out_dir, std::ostream& out);

}  // namespace fracgeo
