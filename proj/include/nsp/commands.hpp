#ifndef NSP_COMMANDS_HPP
#define NSP_COMMANDS_HPP

#include <iosfwd>

namespace nsp {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumerical = 3;

/// Entry point of the `nsp` tool (subcommands detect, threshold, simulate,
/// locate). Returns the process exit status.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

const char* version();

}  // namespace nsp

#endif  // NSP_COMMANDS_HPP
