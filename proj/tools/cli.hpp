#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace sdrcde::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kDataError = 3,
  kNumericalFailure = 4,
};

/// Runs one command line (without the program name). Diagnostics go to
/// `err`, human-readable results to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sdrcde::cli
