#pragma once

#include <string>
#include <vector>

namespace tlsim::cli {

/// Runs one command. `args` excludes the program name.
/// Exit codes: 0 success, 2 usage error, 3 input parse error,
/// 4 numerical failure (singular system / no QR convergence).
int run(const std::vector<std::string>& args);

} // namespace tlsim::cli
