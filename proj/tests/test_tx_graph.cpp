#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "fungibility/error.hpp"
#include "fungibility/tx_graph.hpp"

using namespace fungibility;

TEST(TxGraph, BuilderMergesDropsSelfLoopsAndZeros) {
  TxGraphBuilder b;
  b.add_node("u", NodeKind::address);
  b.add_node("v", NodeKind::address);
  b.add_transfer("u", "v", 3);
  b.add_transfer("u", "v", 4);
  b.add_transfer("v", "u", 2);
  b.add_transfer("u", "u", 5);
  b.add_transfer("v", "u", 0);
  const TxGraph g = b.build();
  ASSERT_EQ(g.edge_count(), 2u);
  EXPECT_EQ(g.edges()[0].amount, 7u);
  EXPECT_EQ(g.edges()[1].amount, 2u);
  EXPECT_EQ(g.node(g.edges()[0].src).id, "u");
}

TEST(TxGraph, NodesAreSortedById) {
  TxGraphBuilder b;
  b.add_node("zeta", NodeKind::address);
  b.add_node("alpha", NodeKind::tx_node);
  const TxGraph g = b.build();
  EXPECT_EQ(g.node(0).id, "alpha");
  EXPECT_EQ(g.node(1).id, "zeta");
  EXPECT_EQ(*g.find("zeta"), 1u);
  EXPECT_FALSE(g.find("missing"));
  EXPECT_THROW(g.index_of("missing"), ValidationError);
}

TEST(TxGraph, BuilderRejectsUnknownEndpointsAndKindClash) {
  TxGraphBuilder b;
  b.add_node("u", NodeKind::address);
  EXPECT_THROW(b.add_transfer("u", "ghost", 1), ValidationError);
  EXPECT_THROW(b.add_node("u", NodeKind::tx_node), ValidationError);
  EXPECT_NO_THROW(b.add_node("u", NodeKind::address));
}

TEST(TxGraph, ExcessOfFigure1Nodes) {
  const TxGraph g = fixtures::fig1_graph();
  EXPECT_EQ(excess(g, "n7"), 2);
  EXPECT_EQ(excess(g, "n8"), 3);
  // n4 receives 2, spends 4 and declares 2.
  EXPECT_EQ(g.inflow(g.index_of("n4")), 2u);
  EXPECT_EQ(g.outflow(g.index_of("n4")), 4u);
  EXPECT_EQ(excess(g, "n4"), 0);
  EXPECT_EQ(excess(g, "tx3"), 0);
  EXPECT_THROW(excess(g, "nope"), ValidationError);
}

TEST(TxGraph, ExcessWithoutBalanceIsNegativeSurplus) {
  TxGraphBuilder b;
  b.add_node("a", NodeKind::address);
  b.add_node("b", NodeKind::address);
  b.add_node("lonely", NodeKind::address);
  b.add_transfer("a", "b", 2);
  const TxGraph g = b.build();
  EXPECT_EQ(excess(g, "a"), -2);
  EXPECT_EQ(excess(g, "lonely"), 0);
}

TEST(TxGraph, Sinks) {
  EXPECT_EQ(sinks(fixtures::fig1_graph()), (std::vector<std::string>{"n7", "n8"}));
  EXPECT_EQ(sinks(fixtures::fig8_graph()), (std::vector<std::string>{"n5"}));
  EXPECT_TRUE(sinks(TxGraphBuilder{}.build()).empty());
}

TEST(TxGraph, InAndOutEdges) {
  const TxGraph g = fixtures::fig1_graph();
  const auto in = g.in_edges(g.index_of("tx6"));
  ASSERT_EQ(in.size(), 2u);
  EXPECT_EQ(g.node(in[0].src).id, "n4");
  EXPECT_EQ(g.node(in[1].src).id, "n5");
  const auto out = g.out_edges(g.index_of("tx6"));
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].amount + out[1].amount, 5u);
}

TEST(TxGraph, InducedSubgraphKeepsInternalEdges) {
  const TxGraph g = fixtures::fig1_graph();
  std::vector<bool> keep(g.node_count(), false);
  for (const char* id : {"n1", "n2", "tx3"}) keep[g.index_of(id)] = true;
  const TxGraph sub = g.induced(keep);
  EXPECT_EQ(sub.node_count(), 3u);
  EXPECT_EQ(sub.edge_count(), 2u);
  EXPECT_EQ(*sub.declared_balance(sub.index_of("n1")), 1u);
}

TEST(TxGraph, WithDeclaredBalances) {
  const TxGraph g = with_declared_balances(fixtures::fig1_graph(), {{"n7", 4}});
  EXPECT_EQ(*g.declared_balance(g.index_of("n7")), 4u);
  EXPECT_THROW(with_declared_balances(g, {{"ghost", 1}}), ValidationError);
}

TEST(TxGraph, MergeByLabel) {
  TxGraphBuilder b;
  b.add_node("a@1", NodeKind::snapshot, "a");
  b.add_node("a@2", NodeKind::snapshot, "a");
  b.add_node("b@1", NodeKind::snapshot, "b");
  b.add_transfer("a@1", "a@2", 3);
  b.add_transfer("a@2", "b@1", 2);
  b.add_transfer("a@1", "b@1", 1);
  b.add_balance("a@1", 3);
  const TxGraph m = merge_by_label(b.build());
  ASSERT_EQ(m.node_count(), 2u);
  ASSERT_EQ(m.edge_count(), 1u);
  EXPECT_EQ(m.edges()[0].amount, 3u);
  EXPECT_EQ(*m.declared_balance(m.index_of("a")), 3u);
}

TEST(TxGraph, EqualityIsStructural) {
  EXPECT_EQ(fixtures::fig1_graph(), fixtures::fig1_graph());
  EXPECT_FALSE(fixtures::fig1_graph() == fixtures::fig8_graph());
}
