#pragma once

namespace qgeo::cli {

// Exit codes shared by every subcommand.
inline constexpr int kOk = 0;
inline constexpr int kCheckFailure = 1;
inline constexpr int kConfigError = 2;
inline constexpr int kNumericAbort = 3;

/// Parses and dispatches: geometry, transport, holonomy, apt, convergence,
/// verify. Returns the process exit code.
int run(int argc, const char* const* argv);

}  // namespace qgeo::cli
