#pragma once

#include <exception>
#include <ostream>
#include <string>
#include <vector>

namespace eegx::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  ///< computation failed
inline constexpr int kExitUsage = 2;    ///< bad flags, unreadable or invalid input

/// Runs one command line (without the program name). Artifacts go to disk, one
/// summary line per written file goes to `out`, diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Exit status for an exception escaping a subcommand.
int exit_code_for(const std::exception& e);

}  // namespace eegx::cli
