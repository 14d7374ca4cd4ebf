// Copyright (c) bkrylov contributors
// SPDX-License-Identifier: Apache-2.0
#include "bkr/dense_block.hpp"

#include <cmath>
#include <string>

#include "bkr/error.hpp"

namespace bkr {

void require(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument(message);
}

void require_dims(bool condition, const std::string& message) {
  if (!condition) throw DimensionError(message);
}

DenseBlock::DenseBlock(Index rows, Index cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

DenseBlock::DenseBlock(Index rows, Index cols, std::vector<double> column_major)
    : rows_(rows), cols_(cols), data_(std::move(column_major)) {
  require_dims(data_.size() == rows_ * cols_, "DenseBlock: data length does not match shape");
}

DenseBlock DenseBlock::identity(Index n) {
  DenseBlock out(n, n);
  for (Index i = 0; i < n; ++i) out(i, i) = 1.0;
  return out;
}

DenseBlock DenseBlock::from_eigen(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  DenseBlock out(static_cast<Index>(m.rows()), static_cast<Index>(m.cols()));
  out.view() = m;
  return out;
}

DenseBlock DenseBlock::transpose() const {
  DenseBlock out(cols_, rows_);
  for (Index j = 0; j < cols_; ++j)
    for (Index i = 0; i < rows_; ++i) out(j, i) = (*this)(i, j);
  return out;
}

bool DenseBlock::all_finite() const noexcept {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

double DenseBlock::frobenius_norm() const noexcept {
  double sum = 0.0;
  for (double v : data_) sum += v * v;
  return std::sqrt(sum);
}

void DenseBlock::require_finite(const char* what) const {
  if (!all_finite()) throw NonFiniteError(std::string(what) + ": non-finite entry");
}

}  // namespace bkr
