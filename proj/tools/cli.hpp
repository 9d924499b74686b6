#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lipfree::cli {

/// Runs one command line (args excludes the program name). The JSON report
/// goes to `out` unless --out is given; diagnostics go to `err`.
/// Exit codes: 0 computed result, 2 input error, 3 internal failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lipfree::cli
