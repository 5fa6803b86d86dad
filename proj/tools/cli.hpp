#pragma once

#include <iosfwd>

namespace glassbox::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kInputError = 2,
  kDegenerate = 3,
};

/// Entry point shared by main() and the tests.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace glassbox::cli
