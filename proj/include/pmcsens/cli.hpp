#ifndef PMCSENS_CLI_HPP
#define PMCSENS_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace pmcsens {

enum ExitCode : int {
    kExitOk = 0,
    kExitInputError = 1,
    kExitNumericalFailure = 2,
};

/// Runs the command line without the program name. Results go to `out`, all
/// diagnostics to `err`. ANSI colour is used in tables only when `color` is set.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, bool color = false);

} // namespace pmcsens

#endif // PMCSENS_CLI_HPP
