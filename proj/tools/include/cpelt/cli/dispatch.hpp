#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cpelt::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kComputation = 2 };

/// Runs one command line. argv[0] is the program name. Reports go to the
/// --report path when given and to `out` otherwise; diagnostics go to `err`.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string version_string();

}  // namespace cpelt::cli
