#pragma once

#include <iosfwd>

namespace ddos {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitInput = 2,
    kExitNumeric = 3,
};

/// Entry point for the `ddosdet` tool. Writes results to `out` and
/// diagnostics to `err`; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ddos
