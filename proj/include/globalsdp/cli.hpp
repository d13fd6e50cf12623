#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace globalsdp::cli {

/// Exit codes: 0 success, 1 problem-level failure, 2 usage error.
inline constexpr int kOk = 0;
inline constexpr int kProblemFailure = 1;
inline constexpr int kUsage = 2;

/// Runs one command; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace globalsdp::cli
