#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace incmart::cli {

enum ExitCode : int { kExitPass = 0, kExitCheckFailed = 1, kExitUsage = 2, kExitIo = 3 };

/// Entry point of the `incmart` tool; args exclude the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace incmart::cli
