#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace tarski::cli {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode : int { Ok = 0, Usage = 1, Malformed = 2 };

/// Runs one subcommand (mean, tarski, type, vembed, wobble, rep, green).
/// `args` excludes the program name. Reports go to `out` as JSON, diagnostics
/// to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tarski::cli
