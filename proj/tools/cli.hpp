#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mfchain::cli {

/// Runs `mfchain <args...>` (args exclude the program name). Exit codes:
/// 0 success, 1 failed check or unconverged solve, 2 usage or config error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mfchain::cli
