#pragma once

#include <iosfwd>

namespace rac {

// Exit codes of the rac tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;  // bad flags, unreadable or malformed input
inline constexpr int kExitInternal = 2;  // consistency check or embedded assertion failed
inline constexpr int kExitMismatch = 3;  // verify found differing hierarchies

// Entry point of the rac tool. Records go to `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rac
