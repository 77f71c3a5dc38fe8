#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wgplvm {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumerical = 4;

// Entry point of the `wgplvm` tool. `args` excludes the program name.
// Human-readable progress goes to `out`; failures print one JSON error
// record to `err` and return the matching exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wgplvm
