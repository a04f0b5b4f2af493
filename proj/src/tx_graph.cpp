#include "fungibility/tx_graph.hpp"

#include <algorithm>
#include <limits>

#include "fungibility/error.hpp"
#include "fungibility/records.hpp"

namespace fungibility {

namespace {

Amount checked_add(Amount a, Amount b, std::string_view what) {
  Amount out = 0;
  if (__builtin_add_overflow(a, b, &out)) {
    throw ValidationError("amount overflow while summing " + std::string(what));
  }
  return out;
}

}  // namespace

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::address: return "address";
    case NodeKind::tx_node: return "tx_node";
    case NodeKind::shielded_pool: return "shielded_pool";
    case NodeKind::snapshot: return "snapshot";
  }
  return "unknown";
}

std::optional<std::size_t> TxGraph::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t TxGraph::index_of(std::string_view id) const {
  if (auto idx = find(id)) return *idx;
  throw ValidationError("unknown node '" + std::string(id) + "'");
}

std::span<const Edge> TxGraph::out_edges(std::size_t node) const {
  return {edges_.data() + out_offsets_.at(node), out_offsets_.at(node + 1) - out_offsets_[node]};
}

std::span<const Edge> TxGraph::in_edges(std::size_t node) const {
  return {in_order_.data() + in_offsets_.at(node), in_offsets_.at(node + 1) - in_offsets_[node]};
}

void TxGraph::finalize() {
  const std::size_t n = nodes_.size();
  std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
    return a.src != b.src ? a.src < b.src : a.dst < b.dst;
  });
  in_order_ = edges_;
  std::stable_sort(in_order_.begin(), in_order_.end(),
                   [](const Edge& a, const Edge& b) { return a.dst < b.dst; });

  out_offsets_.assign(n + 1, 0);
  in_offsets_.assign(n + 1, 0);
  inflow_.assign(n, 0);
  outflow_.assign(n, 0);
  for (const Edge& e : edges_) {
    ++out_offsets_[e.src + 1];
    ++in_offsets_[e.dst + 1];
    outflow_[e.src] = checked_add(outflow_[e.src], e.amount, "outflow of " + nodes_[e.src].id);
    inflow_[e.dst] = checked_add(inflow_[e.dst], e.amount, "inflow of " + nodes_[e.dst].id);
  }
  for (std::size_t i = 0; i < n; ++i) {
    out_offsets_[i + 1] += out_offsets_[i];
    in_offsets_[i + 1] += in_offsets_[i];
  }
  index_.clear();
  index_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) index_.emplace(nodes_[i].id, i);
}

TxGraph TxGraph::induced(const std::vector<bool>& keep) const {
  if (keep.size() != nodes_.size()) {
    throw ValidationError("induced: mask size does not match node count");
  }
  constexpr std::size_t kDropped = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> remap(nodes_.size(), kDropped);
  TxGraph g;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!keep[i]) continue;
    remap[i] = g.nodes_.size();
    g.nodes_.push_back(nodes_[i]);
    g.balances_.push_back(balances_[i]);
  }
  for (const Edge& e : edges_) {
    if (remap[e.src] == kDropped || remap[e.dst] == kDropped) continue;
    g.edges_.push_back({remap[e.src], remap[e.dst], e.amount});
  }
  g.finalize();
  return g;
}

void TxGraphBuilder::add_node(std::string_view id, NodeKind kind, std::string_view label) {
  if (id.empty()) throw ValidationError("node id must not be empty");
  auto it = nodes_.find(id);
  if (it == nodes_.end()) {
    nodes_.emplace(std::string(id), NodeData{kind, std::string(label.empty() ? id : label), {}});
    return;
  }
  if (it->second.kind != kind) {
    throw ValidationError("node '" + std::string(id) + "' used both as " +
                          std::string(to_string(it->second.kind)) + " and " +
                          std::string(to_string(kind)));
  }
}

void TxGraphBuilder::add_transfer(std::string_view src, std::string_view dst, Amount amount) {
  for (std::string_view id : {src, dst}) {
    if (!nodes_.contains(id)) {
      throw ValidationError("transfer references unknown node '" + std::string(id) + "'");
    }
  }
  if (amount == 0 || src == dst) return;
  Amount& slot = transfers_[{std::string(src), std::string(dst)}];
  slot = checked_add(slot, amount, std::string(src) + "->" + std::string(dst));
}

void TxGraphBuilder::add_balance(std::string_view id, Amount amount) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) {
    throw ValidationError("balance for unknown node '" + std::string(id) + "'");
  }
  it->second.balance = checked_add(it->second.balance.value_or(0), amount,
                                   "balance of " + std::string(id));
}

TxGraph TxGraphBuilder::build() const {
  TxGraph g;
  g.nodes_.reserve(nodes_.size());
  std::map<std::string_view, std::size_t> index;
  for (const auto& [id, data] : nodes_) {
    index.emplace(id, g.nodes_.size());
    g.nodes_.push_back({id, data.kind, data.label});
    g.balances_.push_back(data.balance);
  }
  g.edges_.reserve(transfers_.size());
  for (const auto& [pair, amount] : transfers_) {
    g.edges_.push_back({index.at(pair.first), index.at(pair.second), amount});
  }
  g.finalize();
  return g;
}

std::int64_t excess(const TxGraph& graph, std::size_t node) {
  const __int128 value = static_cast<__int128>(graph.inflow(node)) +
                         graph.declared_balance(node).value_or(0) -
                         static_cast<__int128>(graph.outflow(node));
  if (value > std::numeric_limits<std::int64_t>::max() ||
      value < std::numeric_limits<std::int64_t>::min()) {
    throw ValidationError("excess of node '" + graph.node(node).id + "' overflows");
  }
  return static_cast<std::int64_t>(value);
}

std::int64_t excess(const TxGraph& graph, std::string_view node_id) {
  return excess(graph, graph.index_of(node_id));
}

std::vector<std::string> sinks(const TxGraph& graph) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < graph.node_count(); ++i) {
    if (excess(graph, i) > 0) out.push_back(graph.node(i).id);
  }
  return out;
}

TxGraph with_declared_balances(const TxGraph& graph, const std::map<std::string, Amount>& balances) {
  TxGraphBuilder b;
  for (const Node& n : graph.nodes()) b.add_node(n.id, n.kind, n.label);
  for (std::size_t i = 0; i < graph.node_count(); ++i) {
    if (auto bal = graph.declared_balance(i)) b.add_balance(graph.node(i).id, *bal);
  }
  for (const auto& [id, amount] : balances) b.add_balance(id, amount);
  for (const Edge& e : graph.edges()) {
    b.add_transfer(graph.node(e.src).id, graph.node(e.dst).id, e.amount);
  }
  return b.build();
}

TxGraph merge_by_label(const TxGraph& graph) {
  TxGraphBuilder b;
  for (const Node& n : graph.nodes()) {
    b.add_node(n.label, n.label == kShieldedPool ? NodeKind::shielded_pool : NodeKind::address);
  }
  for (std::size_t i = 0; i < graph.node_count(); ++i) {
    if (auto bal = graph.declared_balance(i)) b.add_balance(graph.node(i).label, *bal);
  }
  for (const Edge& e : graph.edges()) {
    b.add_transfer(graph.node(e.src).label, graph.node(e.dst).label, e.amount);
  }
  return b.build();
}

}  // namespace fungibility
