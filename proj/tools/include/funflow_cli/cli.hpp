#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace funflow::cli {

/// Exit status for command-line usage errors.
inline constexpr int kUsageExit = 2;
/// Exit status for failures that are not funflow errors.
inline constexpr int kUnexpectedExit = 1;

/// Runs the funflow command line. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace funflow::cli
