#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace fungibility {

/// Currency amount in the smallest sub-unit of the ledger.
using Amount = std::uint64_t;

enum class NodeKind { address, tx_node, shielded_pool, snapshot };

std::string_view to_string(NodeKind kind);

struct Node {
  std::string id;
  NodeKind kind = NodeKind::address;
  std::string label;

  friend bool operator==(const Node&, const Node&) = default;
};

/// Directed transfer between two node indices of the owning graph.
struct Edge {
  std::size_t src = 0;
  std::size_t dst = 0;
  Amount amount = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Immutable weighted transaction graph.
///
/// Nodes are kept in lexicographic id order, edges in (src, dst) order. There
/// is at most one edge per ordered pair, no self-loops and no zero amounts.
/// Declared balances are explicit initial holdings; nodes without one have
/// their surplus inferred when absorbers are attached.
class TxGraph {
 public:
  TxGraph() = default;

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  std::span<const Node> nodes() const noexcept { return nodes_; }
  const Node& node(std::size_t index) const { return nodes_.at(index); }

  std::optional<std::size_t> find(std::string_view id) const;
  /// Throws ValidationError for unknown ids.
  std::size_t index_of(std::string_view id) const;

  /// All edges sorted by (src, dst).
  std::span<const Edge> edges() const noexcept { return edges_; }
  std::span<const Edge> out_edges(std::size_t node) const;
  /// Incoming edges of `node`, sorted by src.
  std::span<const Edge> in_edges(std::size_t node) const;

  std::optional<Amount> declared_balance(std::size_t node) const { return balances_.at(node); }
  Amount inflow(std::size_t node) const { return inflow_.at(node); }
  Amount outflow(std::size_t node) const { return outflow_.at(node); }

  /// Sub-graph on the nodes flagged in `keep`; edges touching dropped nodes go too.
  TxGraph induced(const std::vector<bool>& keep) const;

  friend bool operator==(const TxGraph& a, const TxGraph& b) {
    return a.nodes_ == b.nodes_ && a.edges_ == b.edges_ && a.balances_ == b.balances_;
  }

 private:
  friend class TxGraphBuilder;

  void finalize();

  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<Edge> in_order_;
  std::vector<std::size_t> out_offsets_;
  std::vector<std::size_t> in_offsets_;
  std::vector<std::optional<Amount>> balances_;
  std::vector<Amount> inflow_;
  std::vector<Amount> outflow_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Accumulates nodes, transfers and balances, then freezes them into a TxGraph.
///
/// Transfers between the same ordered pair are summed. Self-transfers and
/// zero amounts are dropped. Re-adding a node with a different kind is an error.
class TxGraphBuilder {
 public:
  void add_node(std::string_view id, NodeKind kind, std::string_view label = {});
  bool has_node(std::string_view id) const { return nodes_.contains(std::string(id)); }

  /// Both endpoints must have been added.
  void add_transfer(std::string_view src, std::string_view dst, Amount amount);

  /// Adds to the declared balance of an existing node (declaring it if needed).
  void add_balance(std::string_view id, Amount amount);

  TxGraph build() const;

 private:
  struct NodeData {
    NodeKind kind;
    std::string label;
    std::optional<Amount> balance;
  };

  std::map<std::string, NodeData, std::less<>> nodes_;
  std::map<std::pair<std::string, std::string>, Amount> transfers_;
};

/// inflow + declared balance - outflow. Positive for sinks, negative for sources.
std::int64_t excess(const TxGraph& graph, std::size_t node);
std::int64_t excess(const TxGraph& graph, std::string_view node_id);

/// Ids of nodes with positive excess, lexicographic.
std::vector<std::string> sinks(const TxGraph& graph);

/// Adds the given amounts to the declared balances. Every id must exist.
TxGraph with_declared_balances(const TxGraph& graph, const std::map<std::string, Amount>& balances);

/// Merges nodes sharing a label into one address node named after the label.
/// Edges between merged nodes become self-loops and vanish; balances add up.
TxGraph merge_by_label(const TxGraph& graph);

}  // namespace fungibility
