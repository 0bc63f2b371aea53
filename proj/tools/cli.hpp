#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace schrodinger::cli {

enum ExitCode : int {
  kOk = 0,
  kInputError = 1,
  kDegenerate = 2,
  kMaxIter = 3,
  kNoCriterion = 4,
  kDivergent = 5,
  kGapExceeded = 6,
};

/// Runs the command line `args` (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace schrodinger::cli
