#include <gtest/gtest.h>

#include "fungibility/error.hpp"
#include "fungibility/sparse.hpp"

using namespace fungibility;

TEST(Csr, FromTripletsSortsAndLooksUp) {
  const CsrMatrix m = CsrMatrix::from_triplets(2, 3, {{1, 2, 0.5}, {0, 1, 0.25}, {1, 0, 0.5}});
  EXPECT_EQ(m.nnz(), 3u);
  EXPECT_DOUBLE_EQ(m.at(0, 1), 0.25);
  EXPECT_DOUBLE_EQ(m.at(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(m.row_sum(1), 1.0);
  ASSERT_EQ(m.row_cols(1).size(), 2u);
  EXPECT_EQ(m.row_cols(1)[0], 0u);
}

TEST(Csr, RejectsDuplicatesAndOutOfRange) {
  EXPECT_THROW(CsrMatrix::from_triplets(2, 2, {{0, 0, 1.0}, {0, 0, 2.0}}), ValidationError);
  EXPECT_THROW(CsrMatrix::from_triplets(2, 2, {{2, 0, 1.0}}), ValidationError);
}

TEST(Csr, TransposeTwiceIsIdentity) {
  const CsrMatrix m = CsrMatrix::from_triplets(3, 2, {{0, 1, 1.0}, {2, 0, 3.0}, {2, 1, 4.0}});
  const CsrMatrix t = m.transposed();
  EXPECT_EQ(t.rows(), 2u);
  EXPECT_DOUBLE_EQ(t.at(1, 2), 4.0);
  EXPECT_EQ(t.transposed(), m);
}

TEST(Csr, Select) {
  const CsrMatrix m = CsrMatrix::from_triplets(3, 3, {{0, 0, 1}, {1, 2, 2}, {2, 1, 3}, {2, 2, 4}});
  const std::vector<std::size_t> rows = {2, 0};
  const std::vector<std::size_t> cols = {0, 2};
  const CsrMatrix s = m.select(rows, cols);
  EXPECT_EQ(s.rows(), 2u);
  EXPECT_DOUBLE_EQ(s.at(0, 1), 4.0);
  EXPECT_DOUBLE_EQ(s.at(1, 0), 1.0);
  EXPECT_EQ(s.nnz(), 2u);
}

TEST(Csr, AppenderRequiresAscendingColumns) {
  CsrRowAppender a(3);
  a.push(0, 1.0);
  EXPECT_THROW(a.push(0, 1.0), ValidationError);
}
