#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace bercert::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kDomain = 3,
  kCoverageGap = 4,
  kCheckpointCorrupt = 5,
};

/// Runs the command line `args` (without the program name). Results go to
/// `out` unless --out names a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bercert::cli
