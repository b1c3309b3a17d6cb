#pragma once

#include <iosfwd>

namespace gearnet::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitSolver = 2;
inline constexpr int kExitVerification = 3;

/// Subcommands: dof, nullspace, simulate, verify, demo. Returns the exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gearnet::cli
