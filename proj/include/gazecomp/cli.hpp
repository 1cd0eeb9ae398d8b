#ifndef GAZECOMP_CLI_HPP
#define GAZECOMP_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace gazecomp {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitNumeric = 3 };

/// Entry point of the `gazecomp` tool; `args` excludes the program name.
/// Primary output goes to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gazecomp

#endif  // GAZECOMP_CLI_HPP
