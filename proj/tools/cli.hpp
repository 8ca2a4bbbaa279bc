#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace reshare::cli {

inline constexpr const char* kToolVersion = "1.0.0";

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2 };

/// Runs the `reshare` command line. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace reshare::cli
