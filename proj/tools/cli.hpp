#pragma once

#include <iosfwd>

namespace nflood::cli {

/// Process exit codes.
enum ExitCode : int {
  kSuccess = 0,
  kPartialFailure = 1,  ///< some rows failed; the rest were written
  kConfigError = 2,     ///< bad flags, manifest, CSV, model, or model/config mismatch
  kClassifierFailure = 3,
};

/// Runs `nflood <command> ...`. Normal output goes to `out`, progress and
/// diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nflood::cli
