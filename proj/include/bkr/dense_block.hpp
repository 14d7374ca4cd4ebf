// Copyright (c) bkrylov contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace bkr {

using Index = std::size_t;

/// Largest dimension any dense oracle (SVD, materialized K, dense LDL) accepts.
inline constexpr Index kDenseCap = 4096;

/// Column-major dense real matrix: Krylov panels, Gram blocks, RHS panels.
class DenseBlock {
 public:
  DenseBlock() = default;
  DenseBlock(Index rows, Index cols, double fill = 0.0);
  DenseBlock(Index rows, Index cols, std::vector<double> column_major);

  static DenseBlock identity(Index n);
  static DenseBlock from_eigen(const Eigen::Ref<const Eigen::MatrixXd>& m);

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  Index size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(Index i, Index j) noexcept { return data_[j * rows_ + i]; }
  double operator()(Index i, Index j) const noexcept { return data_[j * rows_ + i]; }

  std::span<double> col(Index j) noexcept { return {data_.data() + j * rows_, rows_}; }
  std::span<const double> col(Index j) const noexcept { return {data_.data() + j * rows_, rows_}; }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  const std::vector<double>& values() const noexcept { return data_; }

  Eigen::Map<Eigen::MatrixXd> view() noexcept {
    return {data_.data(), static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_)};
  }
  Eigen::Map<const Eigen::MatrixXd> view() const noexcept {
    return {data_.data(), static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_)};
  }

  DenseBlock transpose() const;
  bool all_finite() const noexcept;
  double frobenius_norm() const noexcept;

  /// Throws NonFiniteError naming `what` if any entry is NaN/Inf.
  void require_finite(const char* what) const;

  friend bool operator==(const DenseBlock&, const DenseBlock&) = default;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<double> data_;
};

}  // namespace bkr
