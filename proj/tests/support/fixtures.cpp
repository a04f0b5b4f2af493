#include "fixtures.hpp"

#include <random>

#include "fungibility/absorbers.hpp"

namespace fixtures {

using namespace fungibility;

std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(FUNGIBILITY_TEST_DATA) / name;
}

TxGraph fig1_graph() {
  TxGraphBuilder b;
  for (const char* n : {"n1", "n2", "n4", "n5", "n7", "n8"}) b.add_node(n, NodeKind::address, n);
  b.add_node("tx3", NodeKind::tx_node);
  b.add_node("tx6", NodeKind::tx_node);
  b.add_transfer("n1", "tx3", 1);
  b.add_transfer("n2", "tx3", 1);
  b.add_transfer("tx3", "n4", 2);
  b.add_transfer("n4", "tx6", 4);
  b.add_transfer("n5", "tx6", 1);
  b.add_transfer("tx6", "n7", 2);
  b.add_transfer("tx6", "n8", 3);
  b.add_balance("n1", 1);
  b.add_balance("n2", 1);
  b.add_balance("n4", 2);
  b.add_balance("n5", 1);
  return b.build();
}

TxGraph fig8_graph() {
  TxGraphBuilder b;
  for (const char* n : {"n1", "n2", "n3", "n4", "n5", "n6"}) b.add_node(n, NodeKind::address, n);
  b.add_transfer("n1", "n2", 8);
  b.add_transfer("n2", "n3", 14);
  b.add_transfer("n3", "n4", 16);
  b.add_transfer("n4", "n5", 10);
  b.add_transfer("n4", "n6", 6);
  b.add_transfer("n6", "n2", 6);
  b.add_balance("n1", 8);
  b.add_balance("n3", 2);
  return b.build();
}

std::vector<TransferRecord> fig4_records() {
  return {
      {0, "MINT", "tx1", 5, false, false},
      {0, "MINT", "tx3", 3, false, false},
      {1, "tx1", "a", 5, false, false},
      {2, "a", "tx2", 2, false, false},
      {3, "tx3", "a", 3, false, false},
      {4, "a", "tx4", 4, false, false},
  };
}

AbsorbingChain chain_of(const TxGraph& g) {
  return build_chain(prune_non_absorbing(augment_absorbers(g)).graph);
}

TxGraph random_graph(std::uint64_t seed, const RandomGraphOptions& options) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint64_t> weight(1, options.max_weight);
  std::uniform_int_distribution<std::size_t> degree(1, options.max_in_degree);
  std::uniform_int_distribution<std::size_t> pick(0, options.nodes - 1);
  std::bernoulli_distribution declare(options.declared_balance_rate);

  TxGraphBuilder b;
  auto name = [](std::size_t i) { return "v" + std::to_string(i); };
  for (std::size_t i = 0; i < options.nodes; ++i) b.add_node(name(i), NodeKind::address, name(i));
  std::vector<std::int64_t> net(options.nodes, 0);
  for (std::size_t v = 0; v < options.nodes; ++v) {
    const std::size_t d = degree(rng);
    for (std::size_t k = 0; k < d; ++k) {
      const std::size_t u = pick(rng);
      if (u == v) continue;
      const auto w = weight(rng);
      b.add_transfer(name(u), name(v), w);
      net[u] -= static_cast<std::int64_t>(w);
      net[v] += static_cast<std::int64_t>(w);
    }
  }
  for (std::size_t i = 0; i < options.nodes; ++i) {
    if (declare(rng)) {
      const auto surplus = net[i] < 0 ? static_cast<Amount>(-net[i]) : 0;
      b.add_balance(name(i), surplus + weight(rng));
    }
  }
  return b.build();
}

AbsorbingChain random_chain(std::uint64_t seed, const RandomGraphOptions& options) {
  for (std::uint64_t s = seed;; s += 0x1000) {
    AbsorbingChain c = chain_of(random_graph(s, options));
    if (c.transient_count() > 0 && c.absorber_count() > 0) return c;
  }
}

}  // namespace fixtures
