#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace see::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kSolver = 2, kVerification = 3 };

/// Entry point of the `see` executable. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Worker count from SEE_THREADS; unset or 0 means hardware concurrency.
/// Throws std::invalid_argument on a malformed value.
unsigned threads_from_env();

}  // namespace see::cli
