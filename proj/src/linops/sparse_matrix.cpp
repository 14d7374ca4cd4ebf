// Copyright (c) bkrylov contributors
// SPDX-License-Identifier: Apache-2.0
#include "bkr/sparse_matrix.hpp"

#include <algorithm>
#include <cmath>

#include "bkr/error.hpp"

namespace bkr {

SparseMatrix::SparseMatrix(Index rows, Index cols, std::vector<Index> row_offsets,
                           std::vector<Index> col_indices, std::vector<double> values)
    : rows_(rows),
      cols_(cols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
  require_dims(row_offsets_.size() == rows_ + 1, "SparseMatrix: row_offsets must have rows+1 entries");
  require_dims(row_offsets_.front() == 0 && row_offsets_.back() == values_.size(),
               "SparseMatrix: row_offsets must start at 0 and end at nnz");
  require_dims(col_indices_.size() == values_.size(), "SparseMatrix: index/value length mismatch");
  for (Index i = 0; i < rows_; ++i) {
    require_dims(row_offsets_[i] <= row_offsets_[i + 1], "SparseMatrix: row_offsets must be nondecreasing");
    for (Index p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) {
      require_dims(col_indices_[p] < cols_, "SparseMatrix: column index out of range");
      require_dims(p == row_offsets_[i] || col_indices_[p - 1] < col_indices_[p],
                   "SparseMatrix: column indices must be strictly increasing within a row");
      require(values_[p] != 0.0, "SparseMatrix: explicit zero stored");
      if (!std::isfinite(values_[p])) throw NonFiniteError("SparseMatrix: non-finite value");
    }
  }
}

SparseMatrix SparseMatrix::from_triplets(Index rows, Index cols, std::vector<Triplet> entries) {
  for (const auto& t : entries)
    require_dims(t.row < rows && t.col < cols, "SparseMatrix::from_triplets: index out of range");
  std::stable_sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<Index> offsets(rows + 1, 0);
  std::vector<Index> cols_out;
  std::vector<double> vals_out;
  cols_out.reserve(entries.size());
  vals_out.reserve(entries.size());
  for (Index p = 0; p < entries.size();) {
    const Index r = entries[p].row;
    const Index c = entries[p].col;
    double sum = 0.0;
    for (; p < entries.size() && entries[p].row == r && entries[p].col == c; ++p) sum += entries[p].value;
    if (sum != 0.0) {
      cols_out.push_back(c);
      vals_out.push_back(sum);
      ++offsets[r + 1];
    }
  }
  for (Index i = 0; i < rows; ++i) offsets[i + 1] += offsets[i];
  return SparseMatrix(rows, cols, std::move(offsets), std::move(cols_out), std::move(vals_out));
}

SparseMatrix SparseMatrix::from_dense(const DenseBlock& dense) {
  std::vector<Index> offsets(dense.rows() + 1, 0);
  std::vector<Index> cols;
  std::vector<double> vals;
  for (Index i = 0; i < dense.rows(); ++i) {
    for (Index j = 0; j < dense.cols(); ++j) {
      if (dense(i, j) != 0.0) {
        cols.push_back(j);
        vals.push_back(dense(i, j));
      }
    }
    offsets[i + 1] = vals.size();
  }
  return SparseMatrix(dense.rows(), dense.cols(), std::move(offsets), std::move(cols), std::move(vals));
}

SparseMatrix SparseMatrix::identity(Index n) {
  std::vector<Index> offsets(n + 1);
  std::vector<Index> cols(n);
  for (Index i = 0; i <= n; ++i) offsets[i] = i;
  for (Index i = 0; i < n; ++i) cols[i] = i;
  return SparseMatrix(n, n, std::move(offsets), std::move(cols), std::vector<double>(n, 1.0));
}

SparseMatrix SparseMatrix::zero(Index rows, Index cols) {
  return SparseMatrix(rows, cols, std::vector<Index>(rows + 1, 0), {}, {});
}

double SparseMatrix::at(Index i, Index j) const {
  require_dims(i < rows_ && j < cols_, "SparseMatrix::at: index out of range");
  const auto cols = row_cols(i);
  const auto it = std::lower_bound(cols.begin(), cols.end(), j);
  if (it == cols.end() || *it != j) return 0.0;
  return values_[row_offsets_[i] + static_cast<Index>(it - cols.begin())];
}

SparseMatrix SparseMatrix::transpose() const {
  std::vector<Index> offsets(cols_ + 1, 0);
  for (Index c : col_indices_) ++offsets[c + 1];
  for (Index j = 0; j < cols_; ++j) offsets[j + 1] += offsets[j];
  std::vector<Index> next(offsets.begin(), offsets.end() - 1);
  std::vector<Index> rows_out(nnz());
  std::vector<double> vals_out(nnz());
  for (Index i = 0; i < rows_; ++i) {
    for (Index p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) {
      const Index dst = next[col_indices_[p]]++;
      rows_out[dst] = i;
      vals_out[dst] = values_[p];
    }
  }
  return SparseMatrix(cols_, rows_, std::move(offsets), std::move(rows_out), std::move(vals_out));
}

DenseBlock SparseMatrix::to_dense() const {
  DenseBlock out(rows_, cols_);
  for (Index i = 0; i < rows_; ++i)
    for (Index p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) out(i, col_indices_[p]) = values_[p];
  return out;
}

std::vector<Triplet> SparseMatrix::triplets() const {
  std::vector<Triplet> out;
  out.reserve(nnz());
  for (Index i = 0; i < rows_; ++i)
    for (Index p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p)
      out.push_back({i, col_indices_[p], values_[p]});
  return out;
}

bool SparseMatrix::is_symmetric() const {
  if (rows_ != cols_) return false;
  return transpose() == *this;
}

}  // namespace bkr
