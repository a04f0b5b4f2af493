#include "fungibility/chain.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <set>

#include "fungibility/error.hpp"

namespace fungibility {

AbsorbingChain::AbsorbingChain(std::vector<std::string> transients, std::vector<std::string> absorbers,
                               CsrMatrix q, CsrMatrix r)
    : transients_(std::move(transients)),
      absorbers_(std::move(absorbers)),
      q_(std::move(q)),
      r_(std::move(r)) {
  const std::size_t t = transients_.size();
  if (q_.rows() != t || q_.cols() != t || r_.rows() != t || r_.cols() != absorbers_.size()) {
    throw ValidationError("chain blocks do not match the state lists");
  }
  transient_index_.reserve(t);
  for (std::size_t i = 0; i < t; ++i) {
    if (!transient_index_.emplace(transients_[i], i).second) {
      throw ValidationError("duplicate transient '" + transients_[i] + "'");
    }
  }
  absorber_index_.reserve(absorbers_.size());
  for (std::size_t j = 0; j < absorbers_.size(); ++j) {
    if (!absorber_index_.emplace(absorbers_[j], j).second) {
      throw ValidationError("duplicate absorber '" + absorbers_[j] + "'");
    }
  }
}

std::optional<std::size_t> AbsorbingChain::find_transient(std::string_view id) const {
  auto it = transient_index_.find(std::string(id));
  if (it == transient_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> AbsorbingChain::find_absorber(std::string_view id) const {
  auto it = absorber_index_.find(std::string(id));
  if (it == absorber_index_.end()) return std::nullopt;
  return it->second;
}

std::size_t AbsorbingChain::transient_index(std::string_view id) const {
  if (auto i = find_transient(id)) return *i;
  throw ValidationError("'" + std::string(id) + "' is not a transient state of the chain");
}

namespace {

// Summing n correctly rounded ratios can drift by about n ulps.
double row_tolerance(std::size_t nnz) {
  return kRowSumTolerance + static_cast<double>(nnz) * std::numeric_limits<double>::epsilon();
}

bool valid_probability(double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; }

}  // namespace

void AbsorbingChain::check_stochastic() const {
  for (std::size_t i = 0; i < transients_.size(); ++i) {
    double sum = 0.0;
    for (const CsrMatrix* block : {&q_, &r_}) {
      for (double p : block->row_values(i)) {
        if (!valid_probability(p)) {
          throw InternalError("row '" + transients_[i] + "' holds an entry outside [0, 1]");
        }
        sum += p;
      }
    }
    const std::size_t nnz = q_.row_cols(i).size() + r_.row_cols(i).size();
    if (std::abs(sum - 1.0) > row_tolerance(nnz)) {
      throw InternalError("row '" + transients_[i] + "' sums to " + std::to_string(sum));
    }
  }
}

AbsorbingChain build_chain(const AugmentedGraph& aug) {
  const TxGraph& g = aug.base();
  const std::size_t t = g.node_count();
  std::vector<std::string> transients;
  transients.reserve(t);
  for (const Node& n : g.nodes()) transients.push_back(n.id);
  std::vector<std::string> absorbers;
  absorbers.reserve(aug.absorbers().size());
  for (const Absorber& a : aug.absorbers()) absorbers.push_back(a.id);

  CsrRowAppender q(t);
  CsrRowAppender r(absorbers.size());
  for (std::size_t u = 0; u < t; ++u) {
    const Amount sigma = aug.in_weight(u);
    if (sigma == 0) {
      throw InternalError("node '" + g.node(u).id +
                          "' has no incoming weight; prune non-absorbing nodes before building the chain");
    }
    const double denom = static_cast<double>(sigma);
    for (const Edge& e : g.in_edges(u)) q.push(e.src, static_cast<double>(e.amount) / denom);
    q.end_row();
    if (auto k = aug.absorber_of(u)) {
      r.push(*k, static_cast<double>(aug.absorbers()[*k].weight) / denom);
    }
    r.end_row();
  }
  AbsorbingChain chain(std::move(transients), std::move(absorbers), std::move(q).finish(),
                       std::move(r).finish());
  chain.check_stochastic();
  return chain;
}

OverrideResult prune_chain(const AbsorbingChain& chain) {
  const std::size_t t = chain.transient_count();
  const CsrMatrix& q = chain.q();
  // Predecessors in the transition graph: i -> j for each Q(i, j) > 0.
  const CsrMatrix qt = q.transposed();

  auto backward_closure = [&](std::vector<bool>& mark, std::deque<std::size_t> frontier) {
    while (!frontier.empty()) {
      const std::size_t j = frontier.front();
      frontier.pop_front();
      const auto preds = qt.row_cols(j);
      const auto probs = qt.row_values(j);
      for (std::size_t k = 0; k < preds.size(); ++k) {
        if (probs[k] > 0.0 && !mark[preds[k]]) {
          mark[preds[k]] = true;
          frontier.push_back(preds[k]);
        }
      }
    }
  };

  std::vector<bool> can_absorb(t, false);
  std::deque<std::size_t> seeds;
  for (std::size_t i = 0; i < t; ++i) {
    for (double p : chain.r().row_values(i)) {
      if (p > 0.0) {
        can_absorb[i] = true;
        seeds.push_back(i);
        break;
      }
    }
  }
  backward_closure(can_absorb, std::move(seeds));

  // Anything that can step into a trapped state is absorbed with probability < 1.
  std::vector<bool> doomed(t, false);
  seeds.clear();
  for (std::size_t i = 0; i < t; ++i) {
    if (!can_absorb[i]) {
      doomed[i] = true;
      seeds.push_back(i);
    }
  }
  if (seeds.empty()) return {chain, {}};
  backward_closure(doomed, std::move(seeds));

  OverrideResult result;
  std::vector<std::size_t> kept;
  std::vector<std::string> kept_ids;
  for (std::size_t i = 0; i < t; ++i) {
    if (doomed[i]) {
      result.removed.push_back(chain.transients()[i]);
    } else {
      kept.push_back(i);
      kept_ids.push_back(chain.transients()[i]);
    }
  }
  std::vector<std::size_t> all_absorbers(chain.absorber_count());
  for (std::size_t j = 0; j < all_absorbers.size(); ++j) all_absorbers[j] = j;
  result.chain = AbsorbingChain(std::move(kept_ids), chain.absorbers(), q.select(kept, kept),
                                chain.r().select(kept, all_absorbers));
  std::sort(result.removed.begin(), result.removed.end());
  return result;
}

OverrideResult apply_overrides(const AbsorbingChain& chain, const HeuristicOverride& overrides) {
  const std::size_t t = chain.transient_count();
  struct Forced {
    std::vector<std::pair<std::size_t, double>> q;
    std::vector<std::pair<std::size_t, double>> r;
  };
  std::vector<std::optional<Forced>> forced(t);

  for (const ForcedRow& row : overrides.rows) {
    if (chain.find_absorber(row.node)) {
      throw ValidationError("override targets absorber '" + row.node + "'; absorber rows are fixed");
    }
    const auto i = chain.find_transient(row.node);
    if (!i) throw ValidationError("override for unknown node '" + row.node + "'");
    if (forced[*i]) throw ValidationError("node '" + row.node + "' overridden twice");

    Forced f;
    double sum = 0.0;
    std::set<std::string> seen;
    for (const auto& [target, p] : row.row) {
      if (!valid_probability(p)) {
        throw ValidationError("override row '" + row.node + "' has probability " + std::to_string(p));
      }
      if (!seen.insert(target).second) {
        throw ValidationError("override row '" + row.node + "' lists '" + target + "' twice");
      }
      sum += p;
      const auto as_transient = chain.find_transient(target);
      const auto as_absorber = chain.find_absorber(target);
      if (as_transient && as_absorber) {
        throw ValidationError("override target '" + target + "' is ambiguous");
      }
      if (!as_transient && !as_absorber) {
        throw ValidationError("override row '" + row.node + "' targets unknown state '" + target + "'");
      }
      if (p == 0.0) continue;
      if (as_transient) {
        f.q.emplace_back(*as_transient, p);
      } else {
        f.r.emplace_back(*as_absorber, p);
      }
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      throw ValidationError("override row '" + row.node + "' sums to " + std::to_string(sum));
    }
    std::sort(f.q.begin(), f.q.end());
    std::sort(f.r.begin(), f.r.end());
    forced[*i] = std::move(f);
  }

  CsrRowAppender q(t);
  CsrRowAppender r(chain.absorber_count());
  for (std::size_t i = 0; i < t; ++i) {
    if (forced[i]) {
      for (const auto& [j, p] : forced[i]->q) q.push(j, p);
      for (const auto& [j, p] : forced[i]->r) r.push(j, p);
    } else {
      const auto qc = chain.q().row_cols(i);
      const auto qv = chain.q().row_values(i);
      for (std::size_t k = 0; k < qc.size(); ++k) q.push(qc[k], qv[k]);
      const auto rc = chain.r().row_cols(i);
      const auto rv = chain.r().row_values(i);
      for (std::size_t k = 0; k < rc.size(); ++k) r.push(rc[k], rv[k]);
    }
    q.end_row();
    r.end_row();
  }
  AbsorbingChain modified(chain.transients(), chain.absorbers(), std::move(q).finish(),
                          std::move(r).finish());
  modified.check_stochastic();
  return prune_chain(modified);
}

}  // namespace fungibility
