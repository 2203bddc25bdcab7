#pragma once

#include <ostream>
#include <span>
#include <string>

namespace memsim {

inline constexpr int exit_ok = 0;
inline constexpr int exit_input_error = 1;
inline constexpr int exit_numerical_error = 2;

/// Runs one command line (without the program name). Diagnostics go to
/// `err`, summaries to `out`; artifacts are written to the paths given.
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace memsim
