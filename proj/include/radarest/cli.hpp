#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace radarest {

/// Runs one CLI invocation. Exit codes: 0 success, 1 usage error, 2 numerical
/// failure, 3 config validation failure. Errors print one line on `err`.
int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace radarest
