#pragma once

#include <iosfwd>

namespace hct {

/// Exit codes of the command-line entry point.
enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitRuntime = 2 };

/// Subcommands: run, compare, synth, check. See `hct --help`.
int cli_main(int argc, const char* const* argv);
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Backprop-vs-finite-difference and projection self-tests; prints one line
/// per check and returns true when all pass.
bool run_self_checks(std::ostream& out);

}  // namespace hct
