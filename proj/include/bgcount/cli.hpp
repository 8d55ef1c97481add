#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bgcount {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;  // an asserted property did not hold
inline constexpr int kExitUsage = 2;        // bad flags, unreadable or malformed input

/// Entry point of the `bgcount` tool. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bgcount
