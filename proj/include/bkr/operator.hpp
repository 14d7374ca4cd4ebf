// Copyright (c) bkrylov contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <span>
#include <vector>

#include "bkr/dense_block.hpp"
#include "bkr/sparse_matrix.hpp"

namespace bkr {

/// Implicit matrix-vector access x -> Ax.
///
/// `delta` is the requested absolute 2-norm accuracy of the product. Exact
/// sparse operators ignore it; it is kept so approximate operators (for
/// instance the inverse operator built by the solver) share the interface.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;

  virtual Index dimension() const noexcept = 0;
  virtual bool is_symmetric() const noexcept = 0;
  virtual void apply(std::span<const double> x, std::span<double> y, double delta = 0.0) const = 0;

  std::vector<double> apply(std::span<const double> x) const;

  /// Column-by-column apply.
  virtual DenseBlock apply_block(const DenseBlock& x) const;

  /// (out_hi + out_lo) = A (hi + lo). The default applies A to both parts in
  /// plain double, which keeps the lo correction but rounds each product;
  /// operators with explicit entries override it with an exact kernel.
  virtual void apply_compensated(const DenseBlock& hi, const DenseBlock& lo, DenseBlock& out_hi,
                                 DenseBlock& out_lo) const;

  /// The underlying matrix when the operator is an explicit sparse matrix.
  virtual const SparseMatrix* matrix() const noexcept { return nullptr; }
};

using OperatorPtr = std::shared_ptr<const LinearOperator>;

class SparseOperator final : public LinearOperator {
 public:
  explicit SparseOperator(SparseMatrix a);

  Index dimension() const noexcept override { return a_.rows(); }
  bool is_symmetric() const noexcept override { return symmetric_; }
  using LinearOperator::apply;
  void apply(std::span<const double> x, std::span<double> y, double delta = 0.0) const override;
  DenseBlock apply_block(const DenseBlock& x) const override;
  void apply_compensated(const DenseBlock& hi, const DenseBlock& lo, DenseBlock& out_hi,
                         DenseBlock& out_lo) const override;
  const SparseMatrix* matrix() const noexcept override { return &a_; }

 private:
  SparseMatrix a_;
  bool symmetric_;
};

/// Square operator embedded in a larger dimension with an identity tail block.
class PaddedOperator final : public LinearOperator {
 public:
  PaddedOperator(OperatorPtr inner, Index padded_dimension);

  Index dimension() const noexcept override { return padded_; }
  Index inner_dimension() const noexcept { return inner_->dimension(); }
  bool is_symmetric() const noexcept override { return inner_->is_symmetric(); }
  using LinearOperator::apply;
  void apply(std::span<const double> x, std::span<double> y, double delta = 0.0) const override;
  DenseBlock apply_block(const DenseBlock& x) const override;
  void apply_compensated(const DenseBlock& hi, const DenseBlock& lo, DenseBlock& out_hi,
                         DenseBlock& out_lo) const override;

 private:
  OperatorPtr inner_;
  Index padded_;
};

OperatorPtr make_operator(SparseMatrix a);

/// Smallest multiple of m that is >= n.
Index round_up_to_multiple(Index n, Index m);

}  // namespace bkr
