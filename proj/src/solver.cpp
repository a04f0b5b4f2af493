#include "fungibility/solver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <memory>

#include "fungibility/error.hpp"
#include "parallel.hpp"

namespace fungibility {

std::string_view to_string(SolverMode mode) {
  switch (mode) {
    case SolverMode::exact: return "exact";
    case SolverMode::iterative: return "iterative";
    case SolverMode::automatic: return "auto";
  }
  return "unknown";
}

SolverMode parse_solver_mode(std::string_view text) {
  if (text == "exact") return SolverMode::exact;
  if (text == "iterative") return SolverMode::iterative;
  if (text == "auto") return SolverMode::automatic;
  throw ValidationError("unknown solver mode '" + std::string(text) + "'");
}

void SolverConfig::validate() const {
  if (!(delta_threshold > 0.0) || !std::isfinite(delta_threshold)) {
    throw ValidationError("delta threshold must be a positive number");
  }
  if (max_iterations == 0) throw ValidationError("max iterations must be positive");
  if (block_width == 0) throw ValidationError("block width must be positive");
  if (threads == 0) throw ValidationError("thread count must be positive");
}

double NodeAbsorption::total_mass() const {
  double s = 0.0;
  for (const AbsorberMass& m : distribution) s += m.probability;
  return s;
}

AbsorptionResult::AbsorptionResult(SolverMode mode, std::vector<std::string> absorber_ids,
                                   std::vector<NodeAbsorption> rows)
    : mode_(mode), absorber_ids_(std::move(absorber_ids)), rows_(std::move(rows)) {
  index_.reserve(rows_.size());
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (!index_.emplace(rows_[i].node, i).second) {
      throw ValidationError("node '" + rows_[i].node + "' queried twice");
    }
  }
}

bool AbsorptionResult::contains(std::string_view node) const {
  return index_.contains(std::string(node));
}

const NodeAbsorption& AbsorptionResult::at(std::string_view node) const {
  auto it = index_.find(std::string(node));
  if (it == index_.end()) {
    throw ValidationError("node '" + std::string(node) + "' is not in the result");
  }
  return rows_[it->second];
}

std::vector<double> AbsorptionResult::dense_row(std::string_view node) const {
  std::vector<double> row(absorber_ids_.size(), 0.0);
  for (const AbsorberMass& m : at(node).distribution) row[m.absorber] = m.probability;
  return row;
}

double expected_steps(const AbsorptionResult& result, std::string_view node) {
  return result.at(node).expected_steps;
}

std::vector<std::size_t> all_transients(const AbsorbingChain& chain) {
  std::vector<std::size_t> out(chain.transient_count());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = i;
  return out;
}

namespace {

void check_queries(const AbsorbingChain& chain, std::span<const std::size_t> queries) {
  if (chain.absorber_count() == 0) throw ValidationError("the chain has no absorbing states");
  std::vector<bool> seen(chain.transient_count(), false);
  for (std::size_t q : queries) {
    if (q >= chain.transient_count()) throw ValidationError("query index out of range");
    if (seen[q]) throw ValidationError("node '" + chain.transients()[q] + "' queried twice");
    seen[q] = true;
  }
}

// LU round-off can leave entries a hair outside [0, 1].
double clamp_probability(double p) { return std::clamp(p, 0.0, 1.0); }

}  // namespace

AbsorptionResult solve_exact(const AbsorbingChain& chain, std::span<const std::size_t> queries) {
  check_queries(chain, queries);
  const std::size_t t = chain.transient_count();
  const std::size_t r = chain.absorber_count();
  std::vector<NodeAbsorption> rows(queries.size());
  for (std::size_t k = 0; k < queries.size(); ++k) {
    rows[k].node = chain.transients()[queries[k]];
    rows[k].transient = queries[k];
  }
  if (queries.empty()) return AbsorptionResult(SolverMode::exact, chain.absorbers(), std::move(rows));

  const auto n = static_cast<Eigen::Index>(t);
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
  for (std::size_t i = 0; i < t; ++i) {
    const auto cols = chain.q().row_cols(i);
    const auto vals = chain.q().row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(cols[k])) -= vals[k];
    }
  }

  auto check_conditioning = [&](const Eigen::PartialPivLU<Eigen::MatrixXd>& lu) {
    const double rcond = lu.rcond();
    if (!(rcond > 1e-14)) {
      throw InternalError("I - Q is singular (rcond " + std::to_string(rcond) +
                          "); some transient state cannot reach an absorber");
    }
  };

  auto emit = [&](NodeAbsorption& row, auto&& probability_of, double steps) {
    for (std::size_t j = 0; j < r; ++j) {
      const double p = clamp_probability(probability_of(j));
      if (p > 0.0) row.distribution.push_back({j, p});
    }
    row.expected_steps = std::max(0.0, steps);
  };

  if (queries.size() < r + 1) {
    // Rows of N straight from (I - Q)^T y = e_i.
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(a.transpose());
    check_conditioning(lu);
    const CsrMatrix& rm = chain.r();
    for (NodeAbsorption& row : rows) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
      e(static_cast<Eigen::Index>(row.transient)) = 1.0;
      const Eigen::VectorXd y = lu.solve(e);
      std::vector<double> b(r, 0.0);
      double steps = 0.0;
      for (std::size_t k = 0; k < t; ++k) {
        const double nk = y(static_cast<Eigen::Index>(k));
        steps += nk;
        const auto cols = rm.row_cols(k);
        const auto vals = rm.row_values(k);
        for (std::size_t m = 0; m < cols.size(); ++m) b[cols[m]] += nk * vals[m];
      }
      emit(row, [&](std::size_t j) { return b[j]; }, steps);
    }
  } else {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    check_conditioning(lu);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(r + 1));
    for (std::size_t i = 0; i < t; ++i) {
      const auto cols = chain.r().row_cols(i);
      const auto vals = chain.r().row_values(i);
      for (std::size_t m = 0; m < cols.size(); ++m) {
        rhs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(cols[m])) = vals[m];
      }
      rhs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(r)) = 1.0;
    }
    const Eigen::MatrixXd x = lu.solve(rhs);
    for (NodeAbsorption& row : rows) {
      const auto i = static_cast<Eigen::Index>(row.transient);
      emit(row, [&](std::size_t j) { return x(i, static_cast<Eigen::Index>(j)); },
           x(i, static_cast<Eigen::Index>(r)));
    }
  }
  return AbsorptionResult(SolverMode::exact, chain.absorbers(), std::move(rows));
}

namespace {

constexpr std::size_t kNotQueried = std::numeric_limits<std::size_t>::max();

struct ColumnResult {
  std::vector<std::pair<std::size_t, double>> mass;       // (query slot, B entry)
  std::vector<std::pair<std::size_t, double>> last_term;  // (query slot, final term entry)
};

/// Scratch space for propagating one sparse column through Q.
class ColumnWorkspace {
 public:
  explicit ColumnWorkspace(std::size_t t) : x_(t, 0.0), y_(t, 0.0), acc_(t, 0.0), mark_(t, 0), acc_mark_(t, 0) {}

  std::size_t size() const noexcept { return x_.size(); }

  /// First k at which this column's term Q^k R[:, column] has no entry above delta.
  std::size_t horizon(const CsrMatrix& qt, const CsrMatrix& rt, std::size_t column, const SolverConfig& config) {
    load(rt, column);
    for (std::size_t iteration = 0;; ++iteration) {
      double term_max = 0.0;
      for (std::size_t i : support_) term_max = std::max(term_max, x_[i]);
      if (term_max <= config.delta_threshold) {
        clear();
        return iteration;
      }
      if (iteration >= config.max_iterations) {
        clear();
        throw ConvergenceError("column " + std::to_string(column) + " still has a term of " +
                                   std::to_string(term_max) + " after " + std::to_string(iteration) +
                                   " iterations",
                               term_max, iteration);
      }
      step(qt);
    }
  }

  /// Sums terms 0..last of the column, keeping only queried rows.
  ColumnResult run(const CsrMatrix& qt, const CsrMatrix& rt, std::size_t column,
                   const std::vector<std::size_t>& slot_of, std::size_t last) {
    ColumnResult out;
    load(rt, column);
    for (std::size_t iteration = 0;; ++iteration) {
      for (std::size_t i : support_) {
        if (slot_of[i] == kNotQueried) continue;
        if (!acc_mark_[i]) {
          acc_mark_[i] = 1;
          acc_touched_.push_back(i);
        }
        acc_[i] += x_[i];
      }
      if (iteration == last) break;
      step(qt);
    }

    std::sort(acc_touched_.begin(), acc_touched_.end());
    for (std::size_t i : acc_touched_) {
      if (acc_[i] > 0.0) out.mass.emplace_back(slot_of[i], acc_[i]);
    }
    for (std::size_t i : support_) {
      if (slot_of[i] != kNotQueried && x_[i] > 0.0) out.last_term.emplace_back(slot_of[i], x_[i]);
    }
    clear();
    return out;
  }

 private:
  void load(const CsrMatrix& rt, std::size_t column) {
    support_.clear();
    for (std::size_t i : rt.row_cols(column)) support_.push_back(i);
    const auto init = rt.row_values(column);
    for (std::size_t k = 0; k < support_.size(); ++k) x_[support_[k]] = init[k];
  }

  // x <- Q x, pushing along transposed rows in ascending source order so every
  // output entry sums its products in ascending transient index.
  void step(const CsrMatrix& qt) {
    touched_.clear();
    for (std::size_t k : support_) {
      const double xk = x_[k];
      const auto rows = qt.row_cols(k);
      const auto vals = qt.row_values(k);
      for (std::size_t m = 0; m < rows.size(); ++m) {
        const std::size_t i = rows[m];
        if (!mark_[i]) {
          mark_[i] = 1;
          touched_.push_back(i);
        }
        y_[i] += vals[m] * xk;
      }
    }
    for (std::size_t k : support_) x_[k] = 0.0;
    const std::size_t t = x_.size();
    if (touched_.size() * 16 > t) {
      touched_.clear();
      for (std::size_t i = 0; i < t; ++i) {
        if (mark_[i]) touched_.push_back(i);
      }
    } else {
      std::sort(touched_.begin(), touched_.end());
    }
    support_.clear();
    for (std::size_t i : touched_) {
      mark_[i] = 0;
      x_[i] = y_[i];
      y_[i] = 0.0;
      support_.push_back(i);
    }
  }

  void clear() {
    for (std::size_t i : support_) x_[i] = 0.0;
    support_.clear();
    for (std::size_t i : acc_touched_) {
      acc_[i] = 0.0;
      acc_mark_[i] = 0;
    }
    acc_touched_.clear();
  }

  std::vector<double> x_, y_, acc_;
  std::vector<char> mark_, acc_mark_;
  std::vector<std::size_t> support_, touched_, acc_touched_;
};

}  // namespace

AbsorptionResult solve_iterative(const AbsorbingChain& chain, const SolverConfig& config,
                                 std::span<const std::size_t> queries) {
  config.validate();
  check_queries(chain, queries);
  const std::size_t t = chain.transient_count();
  const std::size_t r = chain.absorber_count();

  std::vector<NodeAbsorption> rows(queries.size());
  std::vector<std::size_t> slot_of(t, kNotQueried);
  for (std::size_t k = 0; k < queries.size(); ++k) {
    rows[k].node = chain.transients()[queries[k]];
    rows[k].transient = queries[k];
    slot_of[queries[k]] = k;
  }
  if (queries.empty()) return AbsorptionResult(SolverMode::iterative, chain.absorbers(), std::move(rows));

  const CsrMatrix qt = chain.q().transposed();
  const CsrMatrix rt = chain.r().transposed();

  // The stopping index is shared by the whole matrix: the first k at which no
  // entry of Q^k R exceeds delta. Column maxima never grow (rows of Q sum to at
  // most 1), so that is the largest per-column stopping index.
  const std::size_t blocks = (r + config.block_width - 1) / config.block_width;
  auto for_columns = [&](auto&& body) {
    std::vector<std::exception_ptr> errors(r);
    detail::parallel_tasks(blocks, config.threads, [&](std::size_t block) {
      thread_local std::unique_ptr<ColumnWorkspace> ws;
      if (!ws || ws->size() != t) ws = std::make_unique<ColumnWorkspace>(t);
      const std::size_t begin = block * config.block_width;
      const std::size_t end = std::min(r, begin + config.block_width);
      for (std::size_t j = begin; j < end; ++j) {
        try {
          body(*ws, j);
        } catch (...) {
          errors[j] = std::current_exception();
        }
      }
    });
    for (const std::exception_ptr& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  };

  std::vector<std::size_t> horizons(r, 0);
  for_columns([&](ColumnWorkspace& ws, std::size_t j) { horizons[j] = ws.horizon(qt, rt, j, config); });
  const std::size_t last = *std::max_element(horizons.begin(), horizons.end());

  std::vector<ColumnResult> columns(r);
  for_columns([&](ColumnWorkspace& ws, std::size_t j) { columns[j] = ws.run(qt, rt, j, slot_of, last); });
  for (std::size_t j = 0; j < r; ++j) {
    for (const auto& [slot, p] : columns[j].mass) rows[slot].distribution.push_back({j, p});
    for (const auto& [slot, v] : columns[j].last_term) {
      rows[slot].residual = std::max(rows[slot].residual, v);
    }
    columns[j] = {};
  }

  // Expected steps: sum_k Q^k 1, truncated once the largest entry is <= delta.
  std::vector<double> u(t, 1.0), next(t, 0.0), steps(t, 0.0);
  const CsrMatrix& q = chain.q();
  for (std::size_t iteration = 0;; ++iteration) {
    double u_max = 0.0;
    for (std::size_t i = 0; i < t; ++i) {
      steps[i] += u[i];
      u_max = std::max(u_max, u[i]);
    }
    if (u_max <= config.delta_threshold) break;
    if (iteration >= config.max_iterations) {
      throw ConvergenceError("expected-steps series still has a term of " + std::to_string(u_max) +
                                 " after " + std::to_string(iteration) + " iterations",
                             u_max, iteration);
    }
    const std::size_t chunk = 4096;
    detail::parallel_tasks((t + chunk - 1) / chunk, config.threads, [&](std::size_t c) {
      const std::size_t end = std::min(t, (c + 1) * chunk);
      for (std::size_t i = c * chunk; i < end; ++i) {
        double s = 0.0;
        const auto cols = q.row_cols(i);
        const auto vals = q.row_values(i);
        for (std::size_t m = 0; m < cols.size(); ++m) s += vals[m] * u[cols[m]];
        next[i] = s;
      }
    });
    u.swap(next);
  }
  for (NodeAbsorption& row : rows) row.expected_steps = steps[row.transient];

  return AbsorptionResult(SolverMode::iterative, chain.absorbers(), std::move(rows));
}

AbsorptionResult solve(const AbsorbingChain& chain, const SolverConfig& config,
                       std::span<const std::size_t> queries) {
  config.validate();
  switch (config.mode) {
    case SolverMode::exact: return solve_exact(chain, queries);
    case SolverMode::iterative: return solve_iterative(chain, config, queries);
    case SolverMode::automatic:
      if (chain.transient_count() <= config.exact_cutoff) return solve_exact(chain, queries);
      return solve_iterative(chain, config, queries);
  }
  throw InternalError("unhandled solver mode");
}

}  // namespace fungibility
