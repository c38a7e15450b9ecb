#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mgmor {

/// Exit codes shared by every subcommand.
enum ExitCode : int { exit_ok = 0, exit_error = 1, exit_unstable = 2 };

/// Runs the command line (args excludes the program name).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mgmor
