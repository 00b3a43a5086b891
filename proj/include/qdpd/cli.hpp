#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qdpd {

/// Exit codes: 0 success, 1 algorithmic failure (saturation, divergence,
/// desynchronization, infeasible parameters), 2 usage or config error.
enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitUsage = 2 };

/// Entry point behind the `qdpd` executable. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qdpd
