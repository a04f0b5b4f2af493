#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "fungibility/error.hpp"
#include "fungibility/oracle.hpp"
#include "fungibility/solver.hpp"

using namespace fungibility;

TEST(Oracle, Figure1FromN7) {
  const AbsorbingChain c = fixtures::chain_of(fixtures::fig1_graph());
  const WalkStats s = simulate(c, "n7", 100000, 2024);
  const std::vector<double> want = {0.2, 0.2, 0.4, 0.2};
  for (std::size_t j = 0; j < want.size(); ++j) EXPECT_NEAR(s.frequencies[j], want[j], 0.01);
  double total = 0;
  for (double f : s.frequencies) total += f;
  EXPECT_DOUBLE_EQ(total, 1.0);
  EXPECT_NEAR(s.mean_steps, 3.8, 0.05);
}

TEST(Oracle, Figure8FromN5) {
  const AbsorbingChain c = fixtures::chain_of(fixtures::fig8_graph());
  const WalkStats s = simulate(c, "n5", 100000, 77);
  EXPECT_NEAR(s.frequencies[*c.find_absorber("n1'")], 0.8, 0.01);
}

TEST(Oracle, SingleHopAbsorbsImmediately) {
  const AbsorbingChain c = fixtures::chain_of(fixtures::fig1_graph());
  const WalkStats s = simulate(c, "n5", 1000, 5);
  EXPECT_EQ(s.frequencies[*c.find_absorber("n5'")], 1.0);
  EXPECT_EQ(s.mean_steps, 1.0);
  EXPECT_EQ(s.steps_variance, 0.0);
}

TEST(Oracle, SeedDeterminismAndThreadIndependence) {
  const AbsorbingChain c = fixtures::random_chain(4);
  const std::string start = c.transients().back();
  const WalkStats a = simulate(c, start, 20000, 9, kDefaultStepCap, 1);
  const WalkStats b = simulate(c, start, 20000, 9, kDefaultStepCap, 3);
  EXPECT_EQ(a.counts, b.counts);
  EXPECT_EQ(a.mean_steps, b.mean_steps);
  const WalkStats other = simulate(c, start, 20000, 10);
  EXPECT_NE(a.mean_steps, other.mean_steps);
}

TEST(Oracle, WithinThreeSigmaOfExact) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const AbsorbingChain c = fixtures::random_chain(seed, {.nodes = 40});
    const std::string start = c.transients()[c.transient_count() / 2];
    const std::vector<std::size_t> q = {c.transient_index(start)};
    const auto exact = solve_exact(c, q).dense_row(start);
    const std::uint64_t n = 50000;
    const WalkStats s = simulate(c, start, n, 100 + seed);
    for (std::size_t j = 0; j < exact.size(); ++j) {
      const double sigma = std::sqrt(exact[j] * (1 - exact[j]) / static_cast<double>(n));
      EXPECT_LE(std::abs(s.frequencies[j] - exact[j]), 3 * sigma + 1e-12) << "absorber " << j;
    }
  }
}

TEST(Oracle, StepCapAndBadStart) {
  const AbsorbingChain c = fixtures::chain_of(fixtures::fig8_graph());
  EXPECT_THROW(simulate(c, "n5", 100, 1, 2), ConvergenceError);
  EXPECT_THROW(simulate(c, "n1'", 100, 1), ValidationError);
  EXPECT_THROW(simulate(c, "n5", 0, 1), ValidationError);
}
