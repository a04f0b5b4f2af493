#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fungibility/chain.hpp"
#include "fungibility/records.hpp"
#include "fungibility/tx_graph.hpp"

namespace fixtures {

std::filesystem::path data_path(const std::string& name);

/// Transaction graph G of the two-transaction example: n1, n2 -> tx3 -> n4;
/// n4, n5 -> tx6 -> n7, n8.
fungibility::TxGraph fig1_graph();

/// Six accounts with the n2 -> n3 -> n4 -> n6 -> n2 cycle.
fungibility::TxGraph fig8_graph();

/// tx1 pays a 5, a pays tx2 2, tx3 pays a 3, a pays tx4 4.
std::vector<fungibility::TransferRecord> fig4_records();

fungibility::AbsorbingChain chain_of(const fungibility::TxGraph& g);

struct RandomGraphOptions {
  std::size_t nodes = 50;
  std::size_t max_in_degree = 3;
  std::uint64_t max_weight = 100;
  /// Chance that a node gets an explicit balance covering its surplus plus extra.
  double declared_balance_rate = 0.1;
};

/// Random weighted graph with cycles; sources come from outgoing surplus and
/// a few declared balances.
fungibility::TxGraph random_graph(std::uint64_t seed, const RandomGraphOptions& options = {});

/// random_graph, augmented and pruned, as a chain. Retries seeds until the
/// chain has at least one transient and one absorber.
fungibility::AbsorbingChain random_chain(std::uint64_t seed, const RandomGraphOptions& options = {});

}  // namespace fixtures
