#pragma once

#include <iosfwd>

namespace aurora {

/// Exit codes shared by every subcommand. `serve` adds PortBusy and
/// AudioDevice for its startup failures.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitRuntime = 3,
  kExitPortBusy = 4,
  kExitAudioDevice = 5,
};

/// Entry point of the `aurora` tool. Data goes to `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace aurora
