#include "fungibility/absorbers.hpp"

#include <algorithm>
#include <deque>

#include "fungibility/error.hpp"

namespace fungibility {

std::string absorber_id(std::string_view owner_id) { return std::string(owner_id) + "'"; }

AugmentedGraph::AugmentedGraph(TxGraph base, std::vector<Absorber> absorbers)
    : base_(std::move(base)), absorbers_(std::move(absorbers)), absorber_of_(base_.node_count()) {
  for (std::size_t k = 0; k < absorbers_.size(); ++k) {
    const Absorber& a = absorbers_[k];
    if (a.owner >= base_.node_count()) throw ValidationError("absorber owner out of range");
    if (a.weight == 0) throw ValidationError("absorber '" + a.id + "' has zero weight");
    if (absorber_of_[a.owner]) {
      throw ValidationError("node '" + base_.node(a.owner).id + "' has two absorbers");
    }
    if (k > 0 && absorbers_[k - 1].owner >= a.owner) {
      throw ValidationError("absorbers must be ordered by owner");
    }
    absorber_of_[a.owner] = k;
  }
}

Amount AugmentedGraph::in_weight(std::size_t node) const {
  Amount sigma = base_.inflow(node);
  if (auto k = absorber_of_.at(node)) {
    if (__builtin_add_overflow(sigma, absorbers_[*k].weight, &sigma)) {
      throw ValidationError("in-weight overflow at node '" + base_.node(node).id + "'");
    }
  }
  return sigma;
}

AugmentedGraph augment_absorbers(const TxGraph& graph) {
  std::vector<Absorber> absorbers;
  for (std::size_t i = 0; i < graph.node_count(); ++i) {
    const Amount in = graph.inflow(i);
    const Amount out = graph.outflow(i);
    const Amount surplus = out > in ? out - in : 0;
    Amount weight = surplus;
    if (auto declared = graph.declared_balance(i)) {
      if (*declared < surplus) {
        throw ValidationError("node '" + graph.node(i).id + "' spends " + std::to_string(surplus) +
                              " more than it receives but declares a balance of " +
                              std::to_string(*declared) + " (shortfall " +
                              std::to_string(surplus - *declared) + ")");
      }
      weight = *declared;
    }
    if (weight > 0) absorbers.push_back({absorber_id(graph.node(i).id), i, weight});
  }
  return AugmentedGraph(graph, std::move(absorbers));
}

PruneResult prune_non_absorbing(const AugmentedGraph& aug) {
  const TxGraph& g = aug.base();
  std::vector<bool> reached(g.node_count(), false);
  std::deque<std::size_t> frontier;
  for (const Absorber& a : aug.absorbers()) {
    reached[a.owner] = true;
    frontier.push_back(a.owner);
  }
  // A backward walk from u can reach the absorber at w iff w reaches u forwards.
  while (!frontier.empty()) {
    const std::size_t u = frontier.front();
    frontier.pop_front();
    for (const Edge& e : g.out_edges(u)) {
      if (!reached[e.dst]) {
        reached[e.dst] = true;
        frontier.push_back(e.dst);
      }
    }
  }

  PruneResult result;
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    if (!reached[i]) result.removed.push_back(g.node(i).id);
  }
  if (result.removed.empty()) {
    result.graph = aug;
    return result;
  }

  TxGraph kept = g.induced(reached);
  std::vector<Absorber> absorbers;
  for (const Absorber& a : aug.absorbers()) {
    absorbers.push_back({a.id, kept.index_of(g.node(a.owner).id), a.weight});
  }
  result.graph = AugmentedGraph(std::move(kept), std::move(absorbers));
  return result;
}

}  // namespace fungibility
