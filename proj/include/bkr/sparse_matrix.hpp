// Copyright (c) bkrylov contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "bkr/dense_block.hpp"

namespace bkr {

struct Triplet {
  Index row;
  Index col;
  double value;
};

/// Compressed sparse row real matrix.
///
/// Canonical form: row offsets nondecreasing with the last equal to nnz,
/// column indices strictly increasing inside each row, no stored zeros.
/// Every constructor either produces canonical storage or throws.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(Index rows, Index cols, std::vector<Index> row_offsets,
               std::vector<Index> col_indices, std::vector<double> values);

  /// Duplicates are summed, explicit and cancelled zeros dropped.
  static SparseMatrix from_triplets(Index rows, Index cols, std::vector<Triplet> entries);
  static SparseMatrix from_dense(const DenseBlock& dense);
  static SparseMatrix identity(Index n);
  static SparseMatrix zero(Index rows, Index cols);

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  Index nnz() const noexcept { return values_.size(); }

  const std::vector<Index>& row_offsets() const noexcept { return row_offsets_; }
  const std::vector<Index>& col_indices() const noexcept { return col_indices_; }
  const std::vector<double>& values() const noexcept { return values_; }

  std::span<const Index> row_cols(Index i) const noexcept {
    return {col_indices_.data() + row_offsets_[i], row_offsets_[i + 1] - row_offsets_[i]};
  }
  std::span<const double> row_values(Index i) const noexcept {
    return {values_.data() + row_offsets_[i], row_offsets_[i + 1] - row_offsets_[i]};
  }

  /// Entry lookup by binary search; zero when not stored.
  double at(Index i, Index j) const;

  SparseMatrix transpose() const;
  DenseBlock to_dense() const;
  std::vector<Triplet> triplets() const;
  bool is_symmetric() const;

  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<Index> row_offsets_{0};
  std::vector<Index> col_indices_;
  std::vector<double> values_;
};

}  // namespace bkr
