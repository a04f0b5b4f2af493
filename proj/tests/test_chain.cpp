#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "fungibility/absorbers.hpp"
#include "fungibility/chain.hpp"
#include "fungibility/error.hpp"

using namespace fungibility;

namespace {

double q_at(const AbsorbingChain& c, const std::string& from, const std::string& to) {
  return c.q().at(c.transient_index(from), c.transient_index(to));
}

double r_at(const AbsorbingChain& c, const std::string& from, const std::string& to) {
  return c.r().at(c.transient_index(from), *c.find_absorber(to));
}

void expect_stochastic(const AbsorbingChain& c) {
  for (std::size_t i = 0; i < c.transient_count(); ++i) {
    EXPECT_NEAR(c.q().row_sum(i) + c.r().row_sum(i), 1.0, 1e-12) << c.transients()[i];
  }
}

/// Mixer: in1 and in2 deposit 1 each into tx, which pays o1 and o2.
TxGraph mixer() {
  TxGraphBuilder b;
  for (const char* n : {"in1", "in2", "o1", "o2"}) b.add_node(n, NodeKind::address);
  b.add_node("tx", NodeKind::tx_node);
  b.add_transfer("in1", "tx", 1);
  b.add_transfer("in2", "tx", 1);
  b.add_transfer("tx", "o1", 1);
  b.add_transfer("tx", "o2", 1);
  return b.build();
}

}  // namespace

TEST(Chain, Figure1Rows) {
  const AbsorbingChain c = fixtures::chain_of(fixtures::fig1_graph());
  EXPECT_EQ(c.transient_count(), 8u);
  EXPECT_EQ(c.absorber_count(), 4u);
  EXPECT_DOUBLE_EQ(q_at(c, "tx6", "n4"), 0.8);
  EXPECT_DOUBLE_EQ(q_at(c, "tx6", "n5"), 0.2);
  EXPECT_DOUBLE_EQ(q_at(c, "n4", "tx3"), 0.5);
  EXPECT_DOUBLE_EQ(r_at(c, "n4", "n4'"), 0.5);
  EXPECT_DOUBLE_EQ(q_at(c, "n7", "tx6"), 1.0);
  EXPECT_DOUBLE_EQ(r_at(c, "n1", "n1'"), 1.0);
  expect_stochastic(c);
}

TEST(Chain, Figure2InputShares) {
  TxGraphBuilder b;
  for (const char* n : {"a1", "a2", "a3", "o"}) b.add_node(n, NodeKind::address);
  b.add_node("tx", NodeKind::tx_node);
  b.add_transfer("a1", "tx", 1);
  b.add_transfer("a2", "tx", 3);
  b.add_transfer("a3", "tx", 2);
  b.add_transfer("tx", "o", 6);
  const AbsorbingChain c = fixtures::chain_of(b.build());
  EXPECT_DOUBLE_EQ(q_at(c, "tx", "a1"), 1.0 / 6);
  EXPECT_DOUBLE_EQ(q_at(c, "tx", "a2"), 3.0 / 6);
  EXPECT_DOUBLE_EQ(q_at(c, "tx", "a3"), 2.0 / 6);
}

TEST(Chain, LengthTwo) {
  TxGraphBuilder b;
  b.add_node("A", NodeKind::address);
  b.add_node("B", NodeKind::address);
  b.add_transfer("A", "B", 5);
  b.add_balance("A", 5);
  const AbsorbingChain c = fixtures::chain_of(b.build());
  EXPECT_DOUBLE_EQ(q_at(c, "B", "A"), 1.0);
  EXPECT_DOUBLE_EQ(r_at(c, "A", "A'"), 1.0);
  EXPECT_DOUBLE_EQ(c.r().row_sum(c.transient_index("B")), 0.0);
}

TEST(Chain, UnprunedSourcelessNodeIsAnInternalError) {
  TxGraphBuilder b;
  b.add_node("u", NodeKind::address);
  b.add_node("v", NodeKind::address);
  b.add_transfer("u", "v", 5);
  b.add_transfer("v", "u", 5);
  b.add_node("w", NodeKind::address);
  EXPECT_THROW(build_chain(augment_absorbers(b.build())), InternalError);
}

TEST(Chain, RandomChainsAreStochastic) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) expect_stochastic(fixtures::random_chain(seed));
}

TEST(Chain, ScaledWeightsGiveIdenticalMatrices) {
  const TxGraph g = fixtures::random_graph(5);
  TxGraphBuilder b;
  for (const Node& n : g.nodes()) b.add_node(n.id, n.kind, n.label);
  for (const Edge& e : g.edges()) b.add_transfer(g.node(e.src).id, g.node(e.dst).id, e.amount * 37);
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    if (auto bal = g.declared_balance(i)) b.add_balance(g.node(i).id, *bal * 37);
  }
  EXPECT_EQ(fixtures::chain_of(b.build()), fixtures::chain_of(g));
}

TEST(Overrides, MixerMatchesDepositsToWithdrawals) {
  const AbsorbingChain c = fixtures::chain_of(mixer());
  EXPECT_DOUBLE_EQ(q_at(c, "tx", "in1"), 0.5);
  HeuristicOverride o{{{"o1", {{"in1", 1.0}}}, {"o2", {{"in2", 1.0}}}}};
  const OverrideResult r = apply_overrides(c, o);
  EXPECT_TRUE(r.removed.empty());
  EXPECT_DOUBLE_EQ(q_at(r.chain, "o1", "in1"), 1.0);
  EXPECT_DOUBLE_EQ(q_at(r.chain, "o1", "tx"), 0.0);
  EXPECT_DOUBLE_EQ(q_at(r.chain, "o2", "in2"), 1.0);
  EXPECT_DOUBLE_EQ(q_at(r.chain, "tx", "in2"), 0.5);
  expect_stochastic(r.chain);
}

TEST(Overrides, EmptySetIsIdentity) {
  const AbsorbingChain c = fixtures::chain_of(fixtures::fig1_graph());
  const OverrideResult r = apply_overrides(c, {});
  EXPECT_EQ(r.chain, c);
  EXPECT_TRUE(r.removed.empty());
}

TEST(Overrides, TrappedNodesArePruned) {
  // o1 and o2 point at each other, so neither can be absorbed any more.
  const AbsorbingChain c = fixtures::chain_of(mixer());
  HeuristicOverride o{{{"o1", {{"o2", 1.0}}}, {"o2", {{"o1", 1.0}}}}};
  const OverrideResult r = apply_overrides(c, o);
  EXPECT_EQ(r.removed, (std::vector<std::string>{"o1", "o2"}));
  EXPECT_FALSE(r.chain.find_transient("o1"));
  EXPECT_TRUE(r.chain.find_transient("tx"));
  expect_stochastic(r.chain);
}

TEST(Overrides, NodesLeadingIntoATrapArePruned) {
  // o1 sends half its mass into a trapped o2.
  const AbsorbingChain c = fixtures::chain_of(mixer());
  HeuristicOverride o{{{"o1", {{"in1", 0.5}, {"o2", 0.5}}}, {"o2", {{"o2", 1.0}}}}};
  const OverrideResult r = apply_overrides(c, o);
  EXPECT_EQ(r.removed, (std::vector<std::string>{"o1", "o2"}));
}

TEST(Overrides, RowsCanTargetAbsorbers) {
  const AbsorbingChain c = fixtures::chain_of(mixer());
  HeuristicOverride o{{{"o1", {{"in1'", 1.0}}}}};
  const OverrideResult r = apply_overrides(c, o);
  EXPECT_DOUBLE_EQ(r_at(r.chain, "o1", "in1'"), 1.0);
}

TEST(Overrides, Rejections) {
  const AbsorbingChain c = fixtures::chain_of(mixer());
  auto bad = [&](HeuristicOverride o) { EXPECT_THROW(apply_overrides(c, o), ValidationError); };
  bad({{{"o1", {{"in1", 0.7}}}}});
  bad({{{"o1", {{"in1", -0.5}, {"in2", 1.5}}}}});
  bad({{{"in1'", {{"in1", 1.0}}}}});
  bad({{{"ghost", {{"in1", 1.0}}}}});
  bad({{{"o1", {{"ghost", 1.0}}}}});
  bad({{{"o1", {{"in1", 0.5}, {"in1", 0.5}}}}});
  bad({{{"o1", {{"in1", 1.0}}}, {"o1", {{"in2", 1.0}}}}});
}
