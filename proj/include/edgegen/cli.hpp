#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace edgegen {

// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitConfig = 2,
  kExitInfeasibleBudget = 3,
  kExitInfeasibleBandwidth = 4,
  kExitNoFeasibleRegion = 5,
  kExitPolicyInfeasible = 6,
  kExitIo = 7,
  kExitDeviceInfeasible = 8,
  kExitModel = 9,
};

/// Runs the command line (args excludes the program name). Summaries go to
/// `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace edgegen
