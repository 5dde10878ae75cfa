#pragma once

#include <ostream>

namespace osc {

/// Exit codes: 0 success, 1 input error, 2 numerical failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitNumerical = 2;

/// Runs the command-line interface. Results go to `out`, one-line diagnostics
/// and usage text to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace osc
