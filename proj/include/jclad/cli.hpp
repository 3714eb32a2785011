#ifndef JCLAD_CLI_HPP
#define JCLAD_CLI_HPP

#include <iosfwd>

namespace jclad {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,  ///< numerical failure during a run
  kExitConfig = 2,   ///< bad arguments, config or input document
  kExitIo = 3,       ///< unreadable input or unwritable output
  kExitStrict = 4,   ///< --strict and the truncation check failed
};

/// Entry point of the `jclad` tool; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace jclad

#endif  // JCLAD_CLI_HPP
