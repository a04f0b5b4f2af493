#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fungibility::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNonConvergence = 2;
inline constexpr int kExitInternal = 3;

/// Entry point shared by the executable and the tests. `args` excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fungibility::cli
