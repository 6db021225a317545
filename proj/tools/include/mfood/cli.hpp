#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mfood::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kRuntime = 2 };

// Runs one command line (args[0] is the program name). Normal output goes to
// out; errors are reported on err as a single JSON line
//   {"error":"<kind>","message":"..."}
// and mapped to an exit code: 1 for usage or configuration faults, 2 for
// numeric and runtime failures.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mfood::cli
