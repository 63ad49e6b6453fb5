#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hipcap::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs the hipcap command line. Returns 0 on success, 1 on a runtime
/// failure and 2 on a usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hipcap::cli
