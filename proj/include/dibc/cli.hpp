#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dibc::cli {

/// Runs the command line `args` (program name excluded). Data goes to --out
/// or `out`, diagnostics to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Formats with 17 significant digits.
std::string format_number(double v);

}  // namespace dibc::cli
