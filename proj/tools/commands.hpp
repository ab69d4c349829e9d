#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace depscore::cli {

enum ExitCode : int {
    kOk = 0,
    kIoOrParse = 1,
    kDomain = 2,
};

/// Runs one command line. `args` excludes the program name. Results go to
/// `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "[0.77, 1.00]": bounds rounded half-up to two decimals.
std::string format_interval(double lo, double hi);

}  // namespace depscore::cli
