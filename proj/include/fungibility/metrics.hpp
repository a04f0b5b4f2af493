#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fungibility/absorbers.hpp"
#include "fungibility/solver.hpp"

namespace fungibility {

/// Shannon entropy in bits. Entries must be non-negative and sum to one
/// within 1e-6; the input is renormalised before evaluation.
double shannon_entropy(std::span<const double> distribution);

/// Entropy of the node's absorber distribution, renormalised first so mass
/// lost to series truncation does not count as an outcome.
double fungibility(const AbsorptionResult& result, std::string_view node);

/// Normalised in-edge values of the shielded pool from before the window.
class PriorPoolDistribution {
 public:
  /// Normalises raw non-negative values with a positive total.
  static PriorPoolDistribution from_values(std::span<const double> values);
  /// Accepts an already normalised distribution (sum within 1e-9 of one).
  static PriorPoolDistribution from_probabilities(std::vector<double> probabilities);

  const std::vector<double>& probabilities() const noexcept { return probabilities_; }
  double entropy() const { return entropy_; }

 private:
  std::vector<double> probabilities_;
  double entropy_ = 0.0;
};

/// h + p_pool * H(prior): one extra step of uncertainty for mass absorbed at the pool.
double zcash_adjusted_fungibility(double h, double p_pool, const PriorPoolDistribution& prior);

struct Aggregates {
  double mean = 0.0;
  double median = 0.0;
  double variance = 0.0;  // population
  double max = 0.0;

  friend bool operator==(const Aggregates&, const Aggregates&) = default;
};

/// Throws ValidationError on an empty input.
Aggregates summary_stats(std::span<const double> values);

struct ReportRow {
  std::string node;
  double fungibility_bits = 0.0;
  double expected_steps = 0.0;
  /// Absorber id and probability, ids ascending. Empty unless requested.
  std::vector<std::pair<std::string, double>> distribution;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct FungibilityReport {
  std::vector<ReportRow> rows;  // ascending node id
  Aggregates fungibility;
  Aggregates expected_steps;
};

struct PoolAdjustment {
  /// Absorbers standing for the pool (one per pool snapshot in temporal graphs).
  std::vector<std::string> pool_absorbers;
  PriorPoolDistribution prior;
};

/// Builds the report over every row of `result`; aggregates are recomputed
/// from the rows, so an empty result is rejected.
FungibilityReport make_report(const AbsorptionResult& result, bool with_distributions,
                              const PoolAdjustment* pool = nullptr);

/// Recomputes both aggregate blocks from the rows.
void refresh_aggregates(FungibilityReport& report);

struct Histogram {
  std::vector<double> edges;  // bins + 1 entries
  std::vector<std::size_t> counts;
};

Histogram histogram(std::span<const double> values, std::size_t bins);

struct TrajectoryPoint {
  std::size_t step = 0;
  double mean_fungibility = 0.0;
  std::size_t walks = 0;  // walks still moving at this step

  friend bool operator==(const TrajectoryPoint&, const TrajectoryPoint&) = default;
};

/// Forward random walks from an absorber owner along original edges, picking
/// each out-edge with probability proportional to its amount. Step 0 is the
/// start node itself. A walk stops at a node without out-edges.
std::vector<TrajectoryPoint> fungibility_trajectory(const AugmentedGraph& graph,
                                                    const AbsorptionResult& results,
                                                    std::string_view start_owner,
                                                    std::size_t walk_count, std::size_t max_steps,
                                                    std::uint64_t seed);

}  // namespace fungibility
