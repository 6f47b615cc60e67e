// Entry point of the semicap command-line tool, callable in-process.
#pragma once

#include <iosfwd>

namespace semicap {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSizeGuard = 3;
// The value is still written; the solver did not reach its tolerance.
inline constexpr int kExitNonConvergence = 4;

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace semicap
