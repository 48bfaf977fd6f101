#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace klsel::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

// Longest accepted --bits argument; longer inputs go through --input.
inline constexpr std::size_t kMaxInlineBits = std::size_t{1} << 16;

/// Runs one command line (without the program name). Results go to `out`,
/// diagnostics to `err`. Returns 0 on success, 1 on a domain error, 2 on a
/// usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace klsel::cli
