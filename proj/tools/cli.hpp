#pragma once

#include <iosfwd>

namespace vokit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Full command-line entry point; writes reports to `out`, diagnostics to
/// `err` and returns the process exit status.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace vokit::cli
