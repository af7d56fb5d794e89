#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace rflabel::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Runs one `rflabel` invocation. args[0] is the program name. Diagnostics and
/// log lines go to `err`. Returns the process exit code: 0 success, 2 invalid
/// configuration or arguments, 3 I/O failure, 4 infeasible computation, 1 other.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rflabel::cli
