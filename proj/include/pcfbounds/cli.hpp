#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pcf {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitFalse = 1,        // `order`: the inequation is not derivable
  kExitInputError = 2,   // usage, parse or type error
  kExitNonGround = 3,    // free variable used at a non-ground type, or present where forbidden
  kExitResource = 4,     // machine limits exceeded or other runtime failure
};

/// Runs the tool on `args` (without the program name). Reports go to `out`,
/// diagnostics to `err`; `-` as a file name reads `in`.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace pcf
