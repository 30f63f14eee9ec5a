#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace solembed {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitFailure = 2;

/// Runs the `solembed` command line. `args` excludes the program name.
/// Reports go to `out` as JSON, human summaries to `err`.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace solembed
