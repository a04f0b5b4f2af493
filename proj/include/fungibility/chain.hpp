#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fungibility/absorbers.hpp"
#include "fungibility/sparse.hpp"

namespace fungibility {

/// Absorbing Markov chain in canonical form: transient-to-transient block Q
/// (t x t) and transient-to-absorber block R (t x r). The absorber identity
/// block is implicit. Every row of [Q | R] sums to one.
class AbsorbingChain {
 public:
  AbsorbingChain() = default;
  AbsorbingChain(std::vector<std::string> transients, std::vector<std::string> absorbers,
                 CsrMatrix q, CsrMatrix r);

  std::size_t transient_count() const noexcept { return transients_.size(); }
  std::size_t absorber_count() const noexcept { return absorbers_.size(); }

  const std::vector<std::string>& transients() const noexcept { return transients_; }
  const std::vector<std::string>& absorbers() const noexcept { return absorbers_; }

  const CsrMatrix& q() const noexcept { return q_; }
  const CsrMatrix& r() const noexcept { return r_; }

  std::optional<std::size_t> find_transient(std::string_view id) const;
  std::optional<std::size_t> find_absorber(std::string_view id) const;
  /// Throws ValidationError for ids that are not transient states.
  std::size_t transient_index(std::string_view id) const;

  /// Throws InternalError when some row is not a distribution.
  void check_stochastic() const;

  friend bool operator==(const AbsorbingChain& a, const AbsorbingChain& b) {
    return a.transients_ == b.transients_ && a.absorbers_ == b.absorbers_ && a.q_ == b.q_ &&
           a.r_ == b.r_;
  }

 private:
  std::vector<std::string> transients_;
  std::vector<std::string> absorbers_;
  CsrMatrix q_;
  CsrMatrix r_;
  std::unordered_map<std::string, std::size_t> transient_index_;
  std::unordered_map<std::string, std::size_t> absorber_index_;
};

/// Tolerance for a row of [Q | R] to count as summing to one.
inline constexpr double kRowSumTolerance = 1e-12;

/// Reverses the edges of an augmented graph: from node u the walk moves to
/// each in-neighbour w with probability a(w, u) / sigma(u), where sigma(u)
/// includes the absorber weight of u.
AbsorbingChain build_chain(const AugmentedGraph& aug);

/// Replacement transition row for one transient node. Targets may name
/// transient nodes or absorbers.
struct ForcedRow {
  std::string node;
  std::vector<std::pair<std::string, double>> row;
};

struct HeuristicOverride {
  std::vector<ForcedRow> rows;
};

struct OverrideResult {
  AbsorbingChain chain;
  std::vector<std::string> removed;  // transients that could no longer be absorbed
};

/// Replaces the listed rows verbatim, then drops every transient whose walk
/// is no longer absorbed with probability one.
OverrideResult apply_overrides(const AbsorbingChain& chain, const HeuristicOverride& overrides);

/// Removes transients that can reach a closed set of transients holding no
/// route to an absorber. Surviving rows are untouched.
OverrideResult prune_chain(const AbsorbingChain& chain);

}  // namespace fungibility
