#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace clustreg {

// Exit codes of the command-line tool.
enum ExitCode : int { exit_ok = 0, exit_domain = 1, exit_usage = 2 };

// Runs one invocation. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace clustreg
