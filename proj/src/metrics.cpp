#include "fungibility/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fungibility/error.hpp"
#include "fungibility/rng.hpp"

namespace fungibility {

namespace {

// Entropy of non-negative weights after dividing by their total.
double entropy_of_weights(std::span<const double> w, double total) {
  double h = 0.0;
  for (double x : w) {
    if (x > 0.0) {
      const double p = x / total;
      h -= p * std::log2(p);
    }
  }
  return std::max(0.0, h);
}

}  // namespace

double shannon_entropy(std::span<const double> distribution) {
  double total = 0.0;
  for (double p : distribution) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw ValidationError("probability entries must be finite and non-negative");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-6) {
    throw ValidationError("probabilities sum to " + std::to_string(total) + ", not 1");
  }
  return entropy_of_weights(distribution, total);
}

double fungibility(const AbsorptionResult& result, std::string_view node) {
  const NodeAbsorption& row = result.at(node);
  std::vector<double> p;
  p.reserve(row.distribution.size());
  for (const AbsorberMass& m : row.distribution) p.push_back(m.probability);
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  if (!(total > 0.0)) {
    throw InternalError("node '" + std::string(node) + "' has no absorption mass");
  }
  return entropy_of_weights(p, total);
}

PriorPoolDistribution PriorPoolDistribution::from_values(std::span<const double> values) {
  double total = 0.0;
  for (double v : values) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("prior values must be non-negative");
    total += v;
  }
  if (!(total > 0.0)) throw ValidationError("prior values must have a positive total");
  std::vector<double> p;
  p.reserve(values.size());
  for (double v : values) p.push_back(v / total);
  return from_probabilities(std::move(p));
}

PriorPoolDistribution PriorPoolDistribution::from_probabilities(std::vector<double> probabilities) {
  double total = 0.0;
  for (double p : probabilities) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw ValidationError("prior probabilities must be non-negative");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ValidationError("prior probabilities sum to " + std::to_string(total) + ", not 1");
  }
  PriorPoolDistribution out;
  out.entropy_ = entropy_of_weights(probabilities, 1.0);
  out.probabilities_ = std::move(probabilities);
  return out;
}

double zcash_adjusted_fungibility(double h, double p_pool, const PriorPoolDistribution& prior) {
  if (!(h >= 0.0) || !std::isfinite(h)) throw ValidationError("entropy must be non-negative");
  if (!(p_pool >= 0.0 && p_pool <= 1.0)) {
    throw ValidationError("pool probability must lie in [0, 1]");
  }
  if (prior.probabilities().empty()) throw ValidationError("prior distribution is empty");
  return h + p_pool * prior.entropy();
}

Aggregates summary_stats(std::span<const double> values) {
  if (values.empty()) throw ValidationError("cannot summarise an empty set");
  const double n = static_cast<double>(values.size());
  Aggregates a;
  double sum = 0.0;
  for (double v : values) sum += v;
  a.mean = sum / n;
  double sq = 0.0;
  for (double v : values) sq += (v - a.mean) * (v - a.mean);
  a.variance = sq / n;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  a.median = sorted.size() % 2 == 1 ? sorted[mid] : (sorted[mid - 1] + sorted[mid]) / 2.0;
  a.max = sorted.back();
  return a;
}

void refresh_aggregates(FungibilityReport& report) {
  std::vector<double> f, s;
  f.reserve(report.rows.size());
  s.reserve(report.rows.size());
  for (const ReportRow& row : report.rows) {
    f.push_back(row.fungibility_bits);
    s.push_back(row.expected_steps);
  }
  report.fungibility = summary_stats(f);
  report.expected_steps = summary_stats(s);
}

FungibilityReport make_report(const AbsorptionResult& result, bool with_distributions,
                              const PoolAdjustment* pool) {
  std::vector<bool> is_pool(result.absorber_ids().size(), false);
  if (pool != nullptr) {
    const auto& ids = result.absorber_ids();
    for (const std::string& id : pool->pool_absorbers) {
      auto it = std::find(ids.begin(), ids.end(), id);
      if (it != ids.end()) is_pool[static_cast<std::size_t>(it - ids.begin())] = true;
    }
  }

  FungibilityReport report;
  report.rows.reserve(result.rows().size());
  for (const NodeAbsorption& n : result.rows()) {
    ReportRow row;
    row.node = n.node;
    row.fungibility_bits = fungibility(result, n.node);
    row.expected_steps = n.expected_steps;
    if (pool != nullptr) {
      const double total = n.total_mass();
      double p = 0.0;
      for (const AbsorberMass& m : n.distribution) {
        if (is_pool[m.absorber]) p += m.probability / total;
      }
      row.fungibility_bits = zcash_adjusted_fungibility(row.fungibility_bits, std::min(p, 1.0),
                                                        pool->prior);
    }
    if (with_distributions) {
      for (const AbsorberMass& m : n.distribution) {
        row.distribution.emplace_back(result.absorber_ids()[m.absorber], m.probability);
      }
      std::sort(row.distribution.begin(), row.distribution.end());
    }
    report.rows.push_back(std::move(row));
  }
  std::sort(report.rows.begin(), report.rows.end(),
            [](const ReportRow& a, const ReportRow& b) { return a.node < b.node; });
  refresh_aggregates(report);
  return report;
}

Histogram histogram(std::span<const double> values, std::size_t bins) {
  if (bins == 0) throw ValidationError("histogram needs at least one bin");
  if (values.empty()) throw ValidationError("histogram of an empty set");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  double hi = *hi_it;
  if (hi == lo) hi = lo + 1.0;
  Histogram h;
  h.edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) {
    h.edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
  }
  h.edges[bins] = hi;
  h.counts.assign(bins, 0);
  for (double v : values) {
    auto b = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(bins));
    ++h.counts[std::min(b, bins - 1)];
  }
  return h;
}

std::vector<TrajectoryPoint> fungibility_trajectory(const AugmentedGraph& graph,
                                                    const AbsorptionResult& results,
                                                    std::string_view start_owner,
                                                    std::size_t walk_count, std::size_t max_steps,
                                                    std::uint64_t seed) {
  const TxGraph& g = graph.base();
  const auto start = g.find(start_owner);
  if (!start || !graph.absorber_of(*start)) {
    throw ValidationError("'" + std::string(start_owner) + "' does not own an absorber");
  }
  if (walk_count == 0) throw ValidationError("walk count must be positive");

  std::vector<double> f(g.node_count(), -1.0);
  auto f_of = [&](std::size_t node) {
    if (f[node] < 0.0) {
      const std::string& id = g.node(node).id;
      if (!results.contains(id)) {
        throw ValidationError("walk reached '" + id + "', which has no absorption result");
      }
      f[node] = fungibility(results, id);
    }
    return f[node];
  };

  std::vector<double> sums(max_steps + 1, 0.0);
  std::vector<std::size_t> alive(max_steps + 1, 0);
  for (std::size_t w = 0; w < walk_count; ++w) {
    SplitMix64 rng(derive_stream_seed(seed, w));
    std::size_t node = *start;
    for (std::size_t step = 0;; ++step) {
      sums[step] += f_of(node);
      ++alive[step];
      const auto out = g.out_edges(node);
      if (step == max_steps || out.empty()) break;
      Amount total = g.outflow(node);
      const double target = rng.uniform() * static_cast<double>(total);
      double acc = 0.0;
      std::size_t next = out.back().dst;
      for (const Edge& e : out) {
        acc += static_cast<double>(e.amount);
        if (target < acc) {
          next = e.dst;
          break;
        }
      }
      node = next;
    }
  }

  std::vector<TrajectoryPoint> series;
  for (std::size_t step = 0; step <= max_steps && alive[step] > 0; ++step) {
    series.push_back({step, sums[step] / static_cast<double>(alive[step]), alive[step]});
  }
  return series;
}

}  // namespace fungibility
