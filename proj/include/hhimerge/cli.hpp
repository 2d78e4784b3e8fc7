#pragma once

// Command-line front end. Exit codes: 0 success, 2 invalid input,
// 3 I/O failure, 4 solver failure.

namespace hhimerge::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitSolver = 4;

int run(int argc, const char* const* argv);

}  // namespace hhimerge::cli
