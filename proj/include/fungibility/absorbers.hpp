#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "fungibility/tx_graph.hpp"

namespace fungibility {

/// Auxiliary source v' feeding node `owner` with the owner's initial holding.
struct Absorber {
  std::string id;  // owner id followed by a prime
  std::size_t owner = 0;
  Amount weight = 0;

  friend bool operator==(const Absorber&, const Absorber&) = default;
};

/// Transaction graph plus one absorber per node that starts with funds.
/// Absorbers are ordered by owner index and never have incoming edges.
class AugmentedGraph {
 public:
  AugmentedGraph() = default;
  AugmentedGraph(TxGraph base, std::vector<Absorber> absorbers);

  const TxGraph& base() const noexcept { return base_; }
  const std::vector<Absorber>& absorbers() const noexcept { return absorbers_; }

  /// Position in absorbers() of the absorber owned by `node`, if any.
  std::optional<std::size_t> absorber_of(std::size_t node) const { return absorber_of_.at(node); }

  /// Total incoming weight of `node` including its absorber (sigma in the chain).
  Amount in_weight(std::size_t node) const;

  friend bool operator==(const AugmentedGraph& a, const AugmentedGraph& b) {
    return a.base_ == b.base_ && a.absorbers_ == b.absorbers_;
  }

 private:
  TxGraph base_;
  std::vector<Absorber> absorbers_;
  std::vector<std::optional<std::size_t>> absorber_of_;
};

std::string absorber_id(std::string_view owner_id);

/// Attaches absorbers: declared balance when present, otherwise the outgoing
/// surplus max(0, outflow - inflow). Zero weights get no absorber. A declared
/// balance smaller than the surplus it must cover is rejected.
AugmentedGraph augment_absorbers(const TxGraph& graph);

struct PruneResult {
  AugmentedGraph graph;
  std::vector<std::string> removed;  // lexicographic
};

/// Drops every node from which no absorber can be reached by walking edges
/// backwards (equivalently, not reachable forwards from an absorber owner).
PruneResult prune_non_absorbing(const AugmentedGraph& aug);

}  // namespace fungibility
