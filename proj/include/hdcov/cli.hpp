#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hdcov {

/// Exit statuses of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitUsage = 2 };

/// Runs the command line `args` (without the program name).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hdcov
