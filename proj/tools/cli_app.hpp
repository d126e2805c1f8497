#pragma once

#include <string>
#include <vector>

namespace ridesim::cli {

// Runs the command-line tool on `args` (excluding the program name) and
// returns the process exit code: 0 success, 1 usage or input/output error,
// 2 model-level failure (unservable demand, non-convergence, oracle check
// failure, empty ingestion).
int run(const std::vector<std::string>& args);

}  // namespace ridesim::cli
