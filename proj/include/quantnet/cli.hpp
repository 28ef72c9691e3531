#pragma once

#include <ostream>

namespace quantnet::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,            // I/O, parse or configuration error
  kUsage = 2,              // bad command line
  kGuaranteeViolated = 3,  // designer-produced run saturated or left its envelope
};

// quantnet {generate,design,run,compare} ...
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace quantnet::cli
