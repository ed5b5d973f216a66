#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ngds::cli {

/// Exit codes of the ngds tool.
enum ExitCode : int {
  kOk = 0,
  kUsage = 1,      // bad flags or config
  kData = 2,       // unreadable, malformed or mismatched inputs
  kNumerical = 3,  // degenerate numerics (collapsed projections, Fisher flags)
};

/// Runs one invocation. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ngds::cli
