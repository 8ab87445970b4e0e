#ifndef SUBIND_TOOLS_COMMANDS_HPP
#define SUBIND_TOOLS_COMMANDS_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace subind::cli {

enum ExitCode : int {
  kSuccess = 0,
  kInputError = 1,
  kNumericalError = 2,
  kVerificationFailure = 3,
};

/// Runs the command line `args` (args[0] is the program name). The one-line
/// summary goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace subind::cli

#endif  // SUBIND_TOOLS_COMMANDS_HPP
