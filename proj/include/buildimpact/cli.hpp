#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace buildimpact {

inline constexpr int kExitOk = 0;
inline constexpr int kExitImpact = 2;  // `estimate` predicted a slowdown
inline constexpr int kExitUsage = 64;
inline constexpr int kExitData = 65;

/// Runs one CLI invocation. `args` excludes the program name. Reports go to
/// `out` (or the --output file), diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace buildimpact
