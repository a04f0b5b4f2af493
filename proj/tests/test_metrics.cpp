#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "fungibility/absorbers.hpp"
#include "fungibility/builders.hpp"
#include "fungibility/error.hpp"
#include "fungibility/metrics.hpp"

using namespace fungibility;

TEST(Entropy, KnownValues) {
  const std::vector<double> fig1 = {0.2, 0.2, 0.4, 0.2};
  EXPECT_NEAR(shannon_entropy(fig1), 1.921928094887, 1e-12);
  EXPECT_EQ(shannon_entropy(std::vector<double>{1.0}), 0.0);
  EXPECT_NEAR(shannon_entropy(std::vector<double>{0.75, 0.25}), 0.811278124459, 1e-12);
  EXPECT_NEAR(shannon_entropy(std::vector<double>{0.8, 0.2}), 0.721928094887, 1e-12);
}

TEST(Entropy, Rejections) {
  EXPECT_THROW(shannon_entropy(std::vector<double>{0.5, -0.1, 0.6}), ValidationError);
  EXPECT_THROW(shannon_entropy(std::vector<double>{0.5, 0.4}), ValidationError);
  EXPECT_NO_THROW(shannon_entropy(std::vector<double>{0.5, 0.5 - 5e-7}));
}

TEST(Entropy, BoundsAndPermutationInvariance) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> p(1 + rng() % 12);
    double total = 0;
    for (double& x : p) total += (x = u(rng));
    for (double& x : p) x /= total;
    const double h = shannon_entropy(p);
    EXPECT_GE(h, 0.0);
    EXPECT_LE(h, std::log2(static_cast<double>(p.size())) + 1e-12);
    std::shuffle(p.begin(), p.end(), rng);
    EXPECT_NEAR(shannon_entropy(p), h, 1e-12);
  }
  const std::vector<double> uniform(8, 0.125);
  EXPECT_NEAR(shannon_entropy(uniform), 3.0, 1e-12);
}

TEST(Fungibility, FixtureNodes) {
  const AbsorbingChain c = fixtures::chain_of(fixtures::fig1_graph());
  const auto r = solve_exact(c, all_transients(c));
  EXPECT_NEAR(fungibility::fungibility(r, "n7"), 1.9219, 5e-5);
  EXPECT_EQ(fungibility::fungibility(r, "n7"), fungibility::fungibility(r, "n8"));
  EXPECT_EQ(fungibility::fungibility(r, "n1"), 0.0);
  EXPECT_NEAR(fungibility::fungibility(r, "tx3"), 1.0, 1e-12);
  EXPECT_THROW(fungibility::fungibility(r, "ghost"), ValidationError);

  const AbsorbingChain c8 = fixtures::chain_of(fixtures::fig8_graph());
  EXPECT_NEAR(fungibility::fungibility(solve_exact(c8, all_transients(c8)), "n5"), 0.7219, 5e-5);
}

TEST(Fungibility, RenormalisesTruncatedRows) {
  AbsorptionResult r(SolverMode::iterative, {"a'", "b'"}, {{"x", 0, {{0, 0.499}, {1, 0.499}}, 1.0, 0.001}});
  EXPECT_NEAR(fungibility::fungibility(r, "x"), 1.0, 1e-12);
}

TEST(Zcash, Adjustment) {
  const auto half = PriorPoolDistribution::from_probabilities({0.5, 0.5});
  EXPECT_DOUBLE_EQ(zcash_adjusted_fungibility(1.0, 0.5, half), 1.5);
  EXPECT_DOUBLE_EQ(zcash_adjusted_fungibility(0.7, 0.0, half), 0.7);
  const auto four = PriorPoolDistribution::from_values(std::vector<double>{3, 3, 3, 3});
  EXPECT_DOUBLE_EQ(zcash_adjusted_fungibility(0.0, 1.0, four), 2.0);
  const auto point = PriorPoolDistribution::from_probabilities({1.0});
  EXPECT_EQ(zcash_adjusted_fungibility(1.25, 0.9, point), 1.25);
}

TEST(Zcash, Rejections) {
  const auto half = PriorPoolDistribution::from_probabilities({0.5, 0.5});
  EXPECT_THROW(zcash_adjusted_fungibility(1.0, 1.5, half), ValidationError);
  EXPECT_THROW(zcash_adjusted_fungibility(1.0, -0.1, half), ValidationError);
  EXPECT_THROW(PriorPoolDistribution::from_probabilities({0.5, 0.4}), ValidationError);
  EXPECT_THROW(PriorPoolDistribution::from_values(std::vector<double>{0, 0}), ValidationError);
  EXPECT_THROW(PriorPoolDistribution::from_values(std::vector<double>{1, -1}), ValidationError);
  EXPECT_THROW(zcash_adjusted_fungibility(1.0, 0.5, PriorPoolDistribution{}), ValidationError);
}

TEST(Summary, Stats) {
  const Aggregates a = summary_stats(std::vector<double>{0, 1, 2});
  EXPECT_DOUBLE_EQ(a.mean, 1.0);
  EXPECT_DOUBLE_EQ(a.median, 1.0);
  EXPECT_DOUBLE_EQ(a.variance, 2.0 / 3);
  EXPECT_DOUBLE_EQ(a.max, 2.0);
  const Aggregates even = summary_stats(std::vector<double>{4, 1, 3, 2});
  EXPECT_DOUBLE_EQ(even.median, 2.5);
  const Aggregates one = summary_stats(std::vector<double>{0.3});
  EXPECT_EQ(one, (Aggregates{0.3, 0.3, 0.0, 0.3}));
  EXPECT_THROW(summary_stats(std::vector<double>{}), ValidationError);
}

TEST(Report, Figure1Sinks) {
  const AbsorbingChain c = fixtures::chain_of(fixtures::fig1_graph());
  const std::vector<std::size_t> q = {c.transient_index("n8"), c.transient_index("n7")};
  const FungibilityReport rep = make_report(solve_exact(c, q), true);
  ASSERT_EQ(rep.rows.size(), 2u);
  EXPECT_EQ(rep.rows[0].node, "n7");
  EXPECT_NEAR(rep.fungibility.mean, 1.9219, 5e-5);
  EXPECT_EQ(rep.fungibility.variance, 0.0);
  EXPECT_NEAR(rep.expected_steps.max, 3.8, 1e-12);
  ASSERT_EQ(rep.rows[0].distribution.size(), 4u);
  EXPECT_EQ(rep.rows[0].distribution[2].first, "n4'");
  EXPECT_THROW(make_report(AbsorptionResult{}, false), ValidationError);
}

TEST(Report, PoolAdjustmentUsesPoolAbsorption) {
  // t1 shields 4 and the pool (holding 4 from before) pays t2 8.
  const std::vector<TransferRecord> recs = {{0, "MINT", "t1", 4},
                                            {0, "MINT", "z", 4, false, true},
                                            {1, "t1", "z", 4, false, true},
                                            {2, "z", "t2", 8, true, false}};
  const TxGraph g = collapse_shielded(std::span<const TransferRecord>(recs));
  const AbsorbingChain c = fixtures::chain_of(g);
  const std::vector<std::size_t> q = {c.transient_index("t2")};
  const auto r = solve_exact(c, q);
  PoolAdjustment pool{{"shielded_pool'"}, PriorPoolDistribution::from_probabilities({0.25, 0.25, 0.25, 0.25})};
  const FungibilityReport plain = make_report(r, false);
  const FungibilityReport adjusted = make_report(r, false, &pool);
  EXPECT_NEAR(plain.rows[0].fungibility_bits, 1.0, 1e-12);
  EXPECT_NEAR(adjusted.rows[0].fungibility_bits, 1.0 + 0.5 * 2.0, 1e-12);
}

TEST(Histogram, CountsEveryValue) {
  const Histogram h = histogram(std::vector<double>{0, 0.5, 1, 1, 2}, 4);
  ASSERT_EQ(h.edges.size(), 5u);
  EXPECT_EQ(h.edges.front(), 0.0);
  EXPECT_EQ(h.edges.back(), 2.0);
  EXPECT_EQ(h.counts, (std::vector<std::size_t>{1, 1, 2, 1}));
  const Histogram flat = histogram(std::vector<double>{3, 3}, 2);
  EXPECT_EQ(flat.counts[0] + flat.counts[1], 2u);
  EXPECT_THROW(histogram(std::vector<double>{1}, 0), ValidationError);
}

TEST(Trajectory, Figure1FromN1) {
  const AugmentedGraph aug = augment_absorbers(fixtures::fig1_graph());
  const AbsorbingChain c = build_chain(aug);
  const auto r = solve_exact(c, all_transients(c));
  const auto series = fungibility_trajectory(aug, r, "n1", 500, 10, 42);
  ASSERT_GE(series.size(), 2u);
  EXPECT_EQ(series[0].step, 0u);
  EXPECT_EQ(series[0].mean_fungibility, 0.0);
  EXPECT_EQ(series[0].walks, 500u);
  EXPECT_NEAR(series[1].mean_fungibility, 1.0, 1e-12);
  EXPECT_EQ(fungibility_trajectory(aug, r, "n1", 500, 10, 42), series);
  EXPECT_THROW(fungibility_trajectory(aug, r, "n7", 10, 5, 1), ValidationError);
}

TEST(Trajectory, DeterministicChain) {
  TxGraphBuilder b;
  for (const char* n : {"A", "B", "C"}) b.add_node(n, NodeKind::address);
  b.add_node("X", NodeKind::address);
  b.add_transfer("A", "B", 4);
  b.add_transfer("X", "B", 4);
  b.add_transfer("B", "C", 8);
  b.add_balance("A", 4);
  b.add_balance("X", 4);
  const AugmentedGraph aug = augment_absorbers(b.build());
  const AbsorbingChain c = build_chain(aug);
  const auto r = solve_exact(c, all_transients(c));
  for (std::uint64_t seed : {1u, 99u}) {
    const auto s = fungibility_trajectory(aug, r, "A", 20, 10, seed);
    ASSERT_EQ(s.size(), 3u);
    EXPECT_EQ(s[0].mean_fungibility, fungibility::fungibility(r, "A"));
    EXPECT_EQ(s[1].mean_fungibility, fungibility::fungibility(r, "B"));
    EXPECT_EQ(s[2].mean_fungibility, fungibility::fungibility(r, "C"));
    EXPECT_EQ(s[2].walks, 20u);
  }
}
