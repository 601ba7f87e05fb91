#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bigen {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitIo = 2;

// Entry point of the `bigen` tool: generate, analyze, sweep, serve.
// args[0] is the program name.
int runCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bigen
