#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fungibility {

struct Triplet {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;
};

/// Compressed sparse row matrix of doubles. Column indices ascend within a row.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  CsrMatrix(std::size_t rows, std::size_t cols);

  /// Builds from (row, col, value) triplets. Duplicate coordinates are an error.
  static CsrMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nnz() const noexcept { return values_.size(); }

  std::span<const std::size_t> row_cols(std::size_t row) const {
    return {cols_idx_.data() + offsets_[row], offsets_[row + 1] - offsets_[row]};
  }
  std::span<const double> row_values(std::size_t row) const {
    return {values_.data() + offsets_[row], offsets_[row + 1] - offsets_[row]};
  }

  double at(std::size_t row, std::size_t col) const;
  double row_sum(std::size_t row) const;

  CsrMatrix transposed() const;

  /// Keeps the listed rows and columns, re-indexed by their order in the lists.
  /// Entries in dropped columns are discarded.
  CsrMatrix select(std::span<const std::size_t> rows, std::span<const std::size_t> cols) const;

  friend bool operator==(const CsrMatrix&, const CsrMatrix&) = default;

 private:
  friend class CsrRowAppender;

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<std::size_t> cols_idx_;
  std::vector<double> values_;
};

/// Appends rows in order; each row's entries must be pushed in ascending column order.
class CsrRowAppender {
 public:
  explicit CsrRowAppender(std::size_t cols);
  void push(std::size_t col, double value);
  void end_row();
  CsrMatrix finish() &&;

 private:
  CsrMatrix m_;
};

}  // namespace fungibility
