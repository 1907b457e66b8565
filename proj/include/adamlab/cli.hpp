#pragma once

// The adamlab command line: run, sweep, region, concentration, verify and
// heatmap subcommands. Exit codes: 0 success, 1 a requested check failed,
// 2 usage error, 3 I/O or runtime failure.

#include <iosfwd>
#include <string>
#include <vector>

#include "adamlab/pgm.hpp"

namespace adamlab {

enum ExitCode : int { kExitOk = 0, kExitCheckFailed = 1, kExitUsage = 2, kExitRuntime = 3 };

/// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Inserts "--key=value" for every key of a key=value config file that the
/// command line does not already set, right after the subcommand. The
/// "--config <path>" pair itself is removed. Flags on the command line win.
std::vector<std::string> apply_config_file(const std::vector<std::string>& args);

/// Grid of one sweep CSV column, averaged over seeds: columns are beta1
/// ascending, rows beta2 ascending downward. The outcome column maps
/// converged/plateau/diverged to 0/0.5/1. Non-finite cells take the largest
/// finite value in the grid (0 if none).
ScalarGrid heatmap_from_csv(const std::string& csv, const std::string& column, bool log10_scale);

}  // namespace adamlab
