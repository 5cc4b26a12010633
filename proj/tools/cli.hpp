#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace persona::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 1,
  kDataError = 2,
  kNumericalError = 3,
};

// Entry point shared by the personagraph binary and the tests. args excludes
// the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace persona::cli
