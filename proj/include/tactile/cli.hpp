#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tactile::cli {

enum ExitStatus : int { kSuccess = 0, kUsage = 1, kDataError = 2, kNumericalError = 3 };

/// Runs `tactile_pipe <args...>`; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tactile::cli
