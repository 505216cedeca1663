#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ipfe {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

/// Runs one subcommand. `args` excludes the program name. Returns 0 on
/// success, 1 on a usage error (synopsis printed to `err`), 2 on a runtime
/// error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ipfe
