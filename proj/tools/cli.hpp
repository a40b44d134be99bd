#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace volrisk::cli {

/// Runs one command line (without the program name). Returns the process exit code:
/// 0 success, 1 computation failure, 2 input or configuration error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace volrisk::cli
