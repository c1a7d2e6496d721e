#pragma once

#include <ostream>
#include <span>
#include <string>

namespace pretrec {

// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitPipeline = 1, kExitConfig = 2, kExitIo = 3 };

// Parses `args` (without the program name), runs the chosen subcommand and returns its exit
// code. Progress goes to `out`, diagnostics to `err`.
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace pretrec
