// Command-line front end: `wedge <bohm|detector|histories|bridge> [flags]`.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wedge::cli {

enum ExitCode : int { ok = 0, config_error = 2, numerical_failure = 3 };

/// Runs one invocation. `args` excludes the program name. Messages go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace wedge::cli
