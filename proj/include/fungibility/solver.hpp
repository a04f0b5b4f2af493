#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fungibility/chain.hpp"

namespace fungibility {

enum class SolverMode { exact, iterative, automatic };

std::string_view to_string(SolverMode mode);
SolverMode parse_solver_mode(std::string_view text);

struct SolverConfig {
  SolverMode mode = SolverMode::automatic;
  /// Stop a column once the largest entry of its current term Q^k R is at or below this.
  double delta_threshold = 1e-3;
  std::size_t max_iterations = 100000;
  /// Columns of R handed to a worker at a time.
  std::size_t block_width = 64;
  /// Largest transient count still solved by factorisation in automatic mode.
  std::size_t exact_cutoff = 2000;
  unsigned threads = 1;

  void validate() const;
};

struct AbsorberMass {
  std::size_t absorber = 0;
  double probability = 0.0;

  friend bool operator==(const AbsorberMass&, const AbsorberMass&) = default;
};

/// One materialised row of B plus the matching entry of t = N 1.
struct NodeAbsorption {
  std::string node;
  std::size_t transient = 0;
  std::vector<AbsorberMass> distribution;  // ascending absorber index, zeros omitted
  double expected_steps = 0.0;
  /// Largest entry of the last series term kept for this row (0 for exact).
  double residual = 0.0;

  double total_mass() const;

  friend bool operator==(const NodeAbsorption&, const NodeAbsorption&) = default;
};

class AbsorptionResult {
 public:
  AbsorptionResult() = default;
  AbsorptionResult(SolverMode mode, std::vector<std::string> absorber_ids,
                   std::vector<NodeAbsorption> rows);

  SolverMode mode() const noexcept { return mode_; }
  const std::vector<std::string>& absorber_ids() const noexcept { return absorber_ids_; }
  const std::vector<NodeAbsorption>& rows() const noexcept { return rows_; }

  bool contains(std::string_view node) const;
  /// Throws ValidationError for nodes outside the query set.
  const NodeAbsorption& at(std::string_view node) const;

  /// Row as a dense vector over all absorbers.
  std::vector<double> dense_row(std::string_view node) const;

  friend bool operator==(const AbsorptionResult& a, const AbsorptionResult& b) {
    return a.mode_ == b.mode_ && a.absorber_ids_ == b.absorber_ids_ && a.rows_ == b.rows_;
  }

 private:
  SolverMode mode_ = SolverMode::exact;
  std::vector<std::string> absorber_ids_;
  std::vector<NodeAbsorption> rows_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// B = (I - Q)^-1 R and t = (I - Q)^-1 1 by LU factorisation, for the queried rows.
AbsorptionResult solve_exact(const AbsorbingChain& chain, std::span<const std::size_t> queries);

/// Truncated series R + QR + Q^2 R + ... evaluated column by column.
///
/// The series stops at the first k where no entry of Q^k R exceeds
/// delta_threshold; that term is still added. Columns are propagated
/// independently, once to find k and once to sum. Within a column, products are summed in ascending transient order, so the
/// output does not depend on block_width or the thread count. Expected steps
/// use the matching truncation of sum_k Q^k 1.
AbsorptionResult solve_iterative(const AbsorbingChain& chain, const SolverConfig& config,
                                 std::span<const std::size_t> queries);

/// Dispatches on config.mode; automatic picks exact while t <= exact_cutoff.
AbsorptionResult solve(const AbsorbingChain& chain, const SolverConfig& config,
                       std::span<const std::size_t> queries);

double expected_steps(const AbsorptionResult& result, std::string_view node);

/// Every transient index of the chain, ascending.
std::vector<std::size_t> all_transients(const AbsorbingChain& chain);

}  // namespace fungibility
