#include "fungibility/sparse.hpp"

#include <algorithm>
#include <limits>

#include "fungibility/error.hpp"

namespace fungibility {

CsrMatrix::CsrMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), offsets_(rows + 1, 0) {}

CsrMatrix CsrMatrix::from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets) {
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  CsrMatrix m(rows, cols);
  m.cols_idx_.reserve(triplets.size());
  m.values_.reserve(triplets.size());
  for (std::size_t k = 0; k < triplets.size(); ++k) {
    const Triplet& t = triplets[k];
    if (t.row >= rows || t.col >= cols) throw ValidationError("sparse entry out of range");
    if (k > 0 && triplets[k - 1].row == t.row && triplets[k - 1].col == t.col) {
      throw ValidationError("duplicate sparse entry");
    }
    ++m.offsets_[t.row + 1];
    m.cols_idx_.push_back(t.col);
    m.values_.push_back(t.value);
  }
  for (std::size_t i = 0; i < rows; ++i) m.offsets_[i + 1] += m.offsets_[i];
  return m;
}

double CsrMatrix::at(std::size_t row, std::size_t col) const {
  const auto cols = row_cols(row);
  auto it = std::lower_bound(cols.begin(), cols.end(), col);
  if (it == cols.end() || *it != col) return 0.0;
  return row_values(row)[static_cast<std::size_t>(it - cols.begin())];
}

double CsrMatrix::row_sum(std::size_t row) const {
  double s = 0.0;
  for (double v : row_values(row)) s += v;
  return s;
}

CsrMatrix CsrMatrix::transposed() const {
  CsrMatrix t(cols_, rows_);
  t.cols_idx_.resize(nnz());
  t.values_.resize(nnz());
  for (std::size_t c : cols_idx_) ++t.offsets_[c + 1];
  for (std::size_t i = 0; i < cols_; ++i) t.offsets_[i + 1] += t.offsets_[i];
  std::vector<std::size_t> cursor(t.offsets_.begin(), t.offsets_.end() - 1);
  // Rows are visited in order, so each transposed row ends up column-sorted.
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = offsets_[r]; k < offsets_[r + 1]; ++k) {
      const std::size_t pos = cursor[cols_idx_[k]]++;
      t.cols_idx_[pos] = r;
      t.values_[pos] = values_[k];
    }
  }
  return t;
}

CsrMatrix CsrMatrix::select(std::span<const std::size_t> rows, std::span<const std::size_t> cols) const {
  constexpr std::size_t kDropped = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> col_map(cols_, kDropped);
  for (std::size_t k = 0; k < cols.size(); ++k) {
    if (k > 0 && cols[k] <= cols[k - 1]) throw ValidationError("select: columns must ascend");
    col_map.at(cols[k]) = k;
  }
  CsrRowAppender out(cols.size());
  for (std::size_t r : rows) {
    const auto rc = row_cols(r);
    const auto rv = row_values(r);
    for (std::size_t k = 0; k < rc.size(); ++k) {
      if (col_map[rc[k]] != kDropped) out.push(col_map[rc[k]], rv[k]);
    }
    out.end_row();
  }
  return std::move(out).finish();
}

CsrRowAppender::CsrRowAppender(std::size_t cols) : m_(0, cols) {}

void CsrRowAppender::push(std::size_t col, double value) {
  if (col >= m_.cols_) throw ValidationError("sparse column out of range");
  if (m_.offsets_.back() < m_.cols_idx_.size() && m_.cols_idx_.back() >= col) {
    throw ValidationError("sparse row entries must ascend");
  }
  m_.cols_idx_.push_back(col);
  m_.values_.push_back(value);
}

void CsrRowAppender::end_row() {
  m_.offsets_.push_back(m_.cols_idx_.size());
  ++m_.rows_;
}

CsrMatrix CsrRowAppender::finish() && { return std::move(m_); }

}  // namespace fungibility
