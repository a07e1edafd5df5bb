#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace rslcr::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs one command line (args excludes the program name). Normal output goes
/// to `out`; the single-line error report goes to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rslcr::cli
