#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "fungibility/chain.hpp"

namespace fungibility {

/// Empirical absorption statistics from repeated walks on a chain.
struct WalkStats {
  std::string start;
  std::vector<std::uint64_t> counts;  // per absorber, chain order
  std::vector<double> frequencies;    // counts / walk_count
  double mean_steps = 0.0;
  double steps_variance = 0.0;  // sample variance of walk lengths
  std::uint64_t walk_count = 0;
  std::uint64_t seed = 0;
};

inline constexpr std::uint64_t kDefaultStepCap = 1'000'000;

/// Runs `walk_count` walks from `start`, sampling each move from the row of
/// [Q | R], until absorption. Walk i draws from its own SplitMix64 stream
/// derived from (seed, i), so the result does not depend on `threads`.
/// A walk exceeding `step_cap` raises ConvergenceError.
WalkStats simulate(const AbsorbingChain& chain, std::string_view start, std::uint64_t walk_count,
                   std::uint64_t seed, std::uint64_t step_cap = kDefaultStepCap,
                   unsigned threads = 1);

}  // namespace fungibility
