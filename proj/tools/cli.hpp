#pragma once

#include <iosfwd>

namespace orthosfm::cli {

// Stable exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitNoSolution = 2;
inline constexpr int kExitDegenerate = 3;

/// Entry point behind the `orthosfm` executable; usable in-process.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace orthosfm::cli
