#pragma once

#include <iosfwd>

namespace quadflat {

/// Exit codes shared by every subcommand.
enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitDiverged = 2, kExitInvariant = 3 };

/// Entry point of the `quadflat` command-line tool.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace quadflat
