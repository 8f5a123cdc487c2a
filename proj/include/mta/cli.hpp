#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mta {

/// Exit statuses of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitNumeric = 3,
};

/// Runs the `mta` command line. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mta
