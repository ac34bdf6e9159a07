#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ccm::cli {

enum ExitCode : int { kSuccess = 0, kUsageError = 1, kNumericalFailure = 2 };

/// Runs the command line given as argv-style tokens (args[0] is the program name).
int run(const std::vector<std::string> & args, std::ostream & out, std::ostream & err);

}  // namespace ccm::cli
