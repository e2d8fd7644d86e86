#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mmdtest::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitRejected = 2;

/// Entry point of the mmdtest tool. `args` excludes the program name.
/// Subcommands: test, moments, null-quantile, power-sim, accuracy.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mmdtest::cli
