// Subcommands of the evloc executable.

#pragma once

#include <iosfwd>

namespace evloc::cli {

/// Parses argv and runs one subcommand. Returns the process exit code:
/// 0 success, 2 validation error, 3 numerical error.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace evloc::cli
