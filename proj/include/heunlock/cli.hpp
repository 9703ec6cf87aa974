#pragma once

#include <ostream>

namespace heunlock {

/// Exit codes of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,      // lock found / verification passed / scan written
  kExitError = 1,   // usage or computation error
  kExitNoLock = 2,  // no phase lock at the requested point
  kExitVerifyFailed = 3,
};

/// Runs the `heunlock` command line with the given streams; returns the
/// process exit code. Errors are written to `err` as a JSON object.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace heunlock
