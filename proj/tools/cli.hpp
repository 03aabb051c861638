#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace unduloid::cli {

enum ExitCode : int {
  kOk = 0,
  kValidation = 2,
  kNumerical = 3,
  kDegraded = 4,
  kIo = 5,
};

/// Runs the command line `args` (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace unduloid::cli
