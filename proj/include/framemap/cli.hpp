#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace framemap {

/// Run the command line given argv-style arguments (without the program
/// name). Reports go to `out`, errors to `err`. Returns the process exit
/// code: 0 success, 2 validation/usage error, 3 numeric contract violation.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Subcommand -> module operations reachable from it. Audited by a self-test
/// so every operation stays reachable from exactly one subcommand.
std::vector<std::pair<std::string, std::vector<std::string>>> command_coverage();

}  // namespace framemap
