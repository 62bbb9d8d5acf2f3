#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace quicfl::cli {

/// Exit codes of run().
inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

/// Runs one subcommand. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace quicfl::cli
