#include "fungibility/oracle.hpp"

#include <algorithm>
#include <exception>
#include <optional>

#include "fungibility/error.hpp"
#include "fungibility/rng.hpp"
#include "parallel.hpp"

namespace fungibility {

namespace {

struct ChunkTally {
  std::vector<std::uint64_t> counts;
  std::uint64_t steps = 0;
  unsigned __int128 steps_sq = 0;
  std::exception_ptr error;
};

constexpr std::uint64_t kWalksPerChunk = 4096;

}  // namespace

WalkStats simulate(const AbsorbingChain& chain, std::string_view start, std::uint64_t walk_count,
                   std::uint64_t seed, std::uint64_t step_cap, unsigned threads) {
  const auto origin = chain.find_transient(start);
  if (!origin) throw ValidationError("'" + std::string(start) + "' is not a transient state");
  if (walk_count == 0) throw ValidationError("walk count must be positive");
  if (step_cap == 0) throw ValidationError("step cap must be positive");

  const CsrMatrix& q = chain.q();
  const CsrMatrix& r = chain.r();
  const std::size_t absorbers = chain.absorber_count();

  auto walk = [&](SplitMix64& rng, ChunkTally& tally) {
    std::size_t state = *origin;
    for (std::uint64_t steps = 1;; ++steps) {
      if (steps > step_cap) {
        throw ConvergenceError("walk from '" + std::string(start) + "' exceeded " +
                                   std::to_string(step_cap) + " steps without absorbing",
                               0.0, step_cap);
      }
      const double u = rng.uniform();
      double acc = 0.0;
      const auto qc = q.row_cols(state);
      const auto qv = q.row_values(state);
      const auto rc = r.row_cols(state);
      const auto rv = r.row_values(state);
      // Round-off can leave u just above the final cumulative sum; the last
      // entry of the row takes that sliver.
      std::optional<std::size_t> next;
      std::optional<std::size_t> absorbed;
      for (std::size_t k = 0; k < qc.size() && !next; ++k) {
        acc += qv[k];
        if (u < acc) next = qc[k];
      }
      for (std::size_t k = 0; k < rc.size() && !next && !absorbed; ++k) {
        acc += rv[k];
        if (u < acc) absorbed = rc[k];
      }
      if (!next && !absorbed) {
        if (!rc.empty()) {
          absorbed = rc.back();
        } else if (!qc.empty()) {
          next = qc.back();
        } else {
          throw InternalError("transient state '" + chain.transients()[state] + "' has an empty row");
        }
      }
      if (absorbed) {
        ++tally.counts[*absorbed];
        tally.steps += steps;
        tally.steps_sq += static_cast<unsigned __int128>(steps) * steps;
        return;
      }
      state = *next;
    }
  };

  const std::uint64_t chunks = (walk_count + kWalksPerChunk - 1) / kWalksPerChunk;
  std::vector<ChunkTally> tallies(chunks);
  detail::parallel_tasks(chunks, threads, [&](std::size_t c) {
    ChunkTally& tally = tallies[c];
    tally.counts.assign(absorbers, 0);
    const std::uint64_t end = std::min(walk_count, (c + 1) * kWalksPerChunk);
    try {
      for (std::uint64_t i = c * kWalksPerChunk; i < end; ++i) {
        SplitMix64 rng(derive_stream_seed(seed, i));
        walk(rng, tally);
      }
    } catch (...) {
      tally.error = std::current_exception();
    }
  });

  WalkStats stats;
  stats.start = std::string(start);
  stats.walk_count = walk_count;
  stats.seed = seed;
  stats.counts.assign(absorbers, 0);
  std::uint64_t steps = 0;
  unsigned __int128 steps_sq = 0;
  for (const ChunkTally& t : tallies) {
    if (t.error) std::rethrow_exception(t.error);
    for (std::size_t j = 0; j < absorbers; ++j) stats.counts[j] += t.counts[j];
    steps += t.steps;
    steps_sq += t.steps_sq;
  }
  const auto n = static_cast<long double>(walk_count);
  stats.frequencies.resize(absorbers);
  for (std::size_t j = 0; j < absorbers; ++j) {
    stats.frequencies[j] = static_cast<double>(static_cast<long double>(stats.counts[j]) / n);
  }
  const long double mean = static_cast<long double>(steps) / n;
  stats.mean_steps = static_cast<double>(mean);
  if (walk_count > 1) {
    const long double ss = static_cast<long double>(steps_sq) - n * mean * mean;
    stats.steps_variance = static_cast<double>(std::max(0.0L, ss / (n - 1)));
  }
  return stats;
}

}  // namespace fungibility
