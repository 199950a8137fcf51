#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace manquant::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kData = 3,
  kCompute = 4,
};

// Parses `args` (without the program name), runs the command and returns
// its exit code. The one-line summary goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace manquant::cli
