#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace fairgap {

// Entry point behind the `fairgap` binary. Returns the process exit code:
// 0 success, 2 input/schema error, 3 analysis-degenerate error, 1 other.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fairgap
