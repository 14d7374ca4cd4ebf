// Copyright (c) bkrylov contributors
// SPDX-License-Identifier: Apache-2.0
#include "bkr/operator.hpp"

#include <algorithm>

#include "bkr/double_double.hpp"
#include "bkr/error.hpp"
#include "bkr/kernels.hpp"

namespace bkr {

std::vector<double> LinearOperator::apply(std::span<const double> x) const {
  std::vector<double> y(dimension());
  apply(x, y, 0.0);
  return y;
}

DenseBlock LinearOperator::apply_block(const DenseBlock& x) const {
  require_dims(x.rows() == dimension(), "apply_block: row count must equal operator dimension");
  DenseBlock out(dimension(), x.cols());
  for (Index j = 0; j < x.cols(); ++j) apply(x.col(j), out.col(j), 0.0);
  return out;
}

void LinearOperator::apply_compensated(const DenseBlock& hi, const DenseBlock& lo,
                                       DenseBlock& out_hi, DenseBlock& out_lo) const {
  const DenseBlock ah = apply_block(hi);
  const DenseBlock al = apply_block(lo);
  out_hi = DenseBlock(ah.rows(), ah.cols());
  out_lo = DenseBlock(ah.rows(), ah.cols());
  for (Index j = 0; j < ah.cols(); ++j) {
    for (Index i = 0; i < ah.rows(); ++i) {
      const DoubleDouble v = dd::two_sum(ah(i, j), al(i, j));
      out_hi(i, j) = v.hi;
      out_lo(i, j) = v.lo;
    }
  }
}

SparseOperator::SparseOperator(SparseMatrix a) : a_(std::move(a)), symmetric_(a_.is_symmetric()) {
  require_dims(a_.rows() == a_.cols(), "SparseOperator: matrix must be square");
}

void SparseOperator::apply(std::span<const double> x, std::span<double> y, double) const {
  kernels::parallel::spmv(a_, x, y);
}

DenseBlock SparseOperator::apply_block(const DenseBlock& x) const { return kernels::parallel::spmm(a_, x); }

void SparseOperator::apply_compensated(const DenseBlock& hi, const DenseBlock& lo, DenseBlock& out_hi,
                                       DenseBlock& out_lo) const {
  kernels::parallel::spmm_compensated(a_, hi, lo, out_hi, out_lo);
}

PaddedOperator::PaddedOperator(OperatorPtr inner, Index padded_dimension)
    : inner_(std::move(inner)), padded_(padded_dimension) {
  require(inner_ != nullptr, "PaddedOperator: null operator");
  require_dims(padded_ >= inner_->dimension(), "PaddedOperator: padded dimension smaller than operator");
}

void PaddedOperator::apply(std::span<const double> x, std::span<double> y, double delta) const {
  require_dims(x.size() == padded_ && y.size() == padded_, "PaddedOperator::apply: length mismatch");
  const Index n = inner_->dimension();
  inner_->apply(x.first(n), y.first(n), delta);
  std::copy(x.begin() + static_cast<std::ptrdiff_t>(n), x.end(), y.begin() + static_cast<std::ptrdiff_t>(n));
}

namespace {

DenseBlock leading_rows(const DenseBlock& x, Index n) {
  DenseBlock out(n, x.cols());
  for (Index j = 0; j < x.cols(); ++j) std::copy_n(x.col(j).data(), n, out.col(j).data());
  return out;
}

DenseBlock with_tail(const DenseBlock& head, const DenseBlock& full) {
  DenseBlock out = full;
  for (Index j = 0; j < full.cols(); ++j) std::copy_n(head.col(j).data(), head.rows(), out.col(j).data());
  return out;
}

}  // namespace

DenseBlock PaddedOperator::apply_block(const DenseBlock& x) const {
  require_dims(x.rows() == padded_, "PaddedOperator::apply_block: row count mismatch");
  const Index n = inner_->dimension();
  if (n == padded_) return inner_->apply_block(x);
  return with_tail(inner_->apply_block(leading_rows(x, n)), x);
}

void PaddedOperator::apply_compensated(const DenseBlock& hi, const DenseBlock& lo, DenseBlock& out_hi,
                                       DenseBlock& out_lo) const {
  require_dims(hi.rows() == padded_ && lo.rows() == padded_, "PaddedOperator: row count mismatch");
  const Index n = inner_->dimension();
  if (n == padded_) {
    inner_->apply_compensated(hi, lo, out_hi, out_lo);
    return;
  }
  DenseBlock head_hi;
  DenseBlock head_lo;
  inner_->apply_compensated(leading_rows(hi, n), leading_rows(lo, n), head_hi, head_lo);
  out_hi = with_tail(head_hi, hi);
  out_lo = with_tail(head_lo, lo);
}

OperatorPtr make_operator(SparseMatrix a) { return std::make_shared<SparseOperator>(std::move(a)); }

Index round_up_to_multiple(Index n, Index m) {
  require(m > 0, "round_up_to_multiple: m must be positive");
  return (n + m - 1) / m * m;
}

}  // namespace bkr
