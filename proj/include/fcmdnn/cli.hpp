#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace fcmdnn {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Runs one `fcmdnn` command. `args` excludes the program name.
/// Returns 0 on success, 1 on runtime/data errors, 2 on usage/validation errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace fcmdnn
