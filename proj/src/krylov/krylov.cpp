// Copyright (c) bkrylov contributors
// SPDX-License-Identifier: Apache-2.0
#include "bkr/krylov.hpp"

#include <algorithm>
#include <string>

#include "bkr/double_double.hpp"
#include "bkr/error.hpp"
#include "bkr/kernels.hpp"

namespace bkr {

KrylovOperator::KrylovOperator(OperatorPtr a, SparseMatrix g, Index steps)
    : a_(std::move(a)), g_(std::move(g)), gt_(g_.transpose()), steps_(steps) {
  require(a_ != nullptr, "KrylovOperator: null operator");
  require(steps_ >= 1, "KrylovOperator: step count must be positive");
  require_dims(g_.rows() == a_->dimension(), "KrylovOperator: G must have n rows");
  require_dims(g_.cols() * steps_ == g_.rows(), "KrylovOperator: s * m must equal n");
  require(a_->is_symmetric(), "KrylovOperator: operator must be symmetric");
  if (n() <= kDenseCap) {
    std::vector<DenseBlock> blocks;
    blocks.reserve(steps_);
    blocks.push_back(g_.to_dense());
    for (Index i = 1; i < steps_; ++i) blocks.push_back(a_->apply_block(blocks.back()));
    blocks_ = std::move(blocks);
  }
}

std::vector<double> KrylovOperator::apply(std::span<const double> y) const {
  const Index s = block_width();
  require_dims(y.size() == s * steps_, "KrylovOperator::apply: y must have m * s entries");
  std::vector<double> x = spmv(g_, y.subspan((steps_ - 1) * s, s));
  std::vector<double> ax(n());
  std::vector<double> gy(n());
  for (Index i = steps_ - 1; i-- > 0;) {
    a_->apply(x, ax, 0.0);
    kernels::parallel::spmv(g_, y.subspan(i * s, s), gy);
    for (Index r = 0; r < n(); ++r) x[r] = ax[r] + gy[r];
  }
  return x;
}

std::vector<double> KrylovOperator::apply_transpose(std::span<const double> x) const {
  require_dims(x.size() == n(), "KrylovOperator::apply_transpose: x must have n entries");
  const Index s = block_width();
  std::vector<double> out(s * steps_);
  std::vector<double> w(x.begin(), x.end());
  std::vector<double> next(n());
  for (Index i = 0; i < steps_; ++i) {
    kernels::parallel::spmv(gt_, w, std::span<double>(out).subspan(i * s, s));
    if (i + 1 < steps_) {
      a_->apply(w, next, 0.0);
      w.swap(next);
    }
  }
  return out;
}

DenseBlock KrylovOperator::materialize() const {
  if (n() > kDenseCap) throw CapacityError("KrylovOperator::materialize: n exceeds dense cap");
  const Index s = block_width();
  DenseBlock k(n(), s * steps_);
  const auto& blocks = *blocks_;
  for (Index i = 0; i < steps_; ++i)
    for (Index j = 0; j < s; ++j) std::copy_n(blocks[i].col(j).data(), n(), k.col(i * s + j).data());
  return k;
}

KrylovOperator build_krylov(OperatorPtr a, SparseMatrix g, Index steps) {
  return KrylovOperator(std::move(a), std::move(g), steps);
}

DenseBlock BlockHankelMatrix::expand() const {
  const Index dim = dimension();
  DenseBlock out(dim, dim);
  for (Index bj = 0; bj < m; ++bj)
    for (Index bi = 0; bi < m; ++bi) {
      const DenseBlock& b = block(bi, bj);
      for (Index j = 0; j < s; ++j)
        for (Index i = 0; i < s; ++i) out(bi * s + i, bj * s + j) = b(i, j);
    }
  return out;
}

BlockHankelMatrix assemble_block_hankel(const KrylovOperator& k) {
  const Index s = k.block_width();
  const Index m = k.steps();
  BlockHankelMatrix h;
  h.s = s;
  h.m = m;
  h.blocks.reserve(2 * m - 1);
  h.tails.reserve(2 * m - 1);

  DenseBlock panel_hi = k.sketch().to_dense();
  DenseBlock panel_lo(panel_hi.rows(), panel_hi.cols());
  DenseBlock next_hi;
  DenseBlock next_lo;
  DenseBlock moment_hi;
  DenseBlock moment_lo;
  for (Index power = 1; power <= 2 * m; ++power) {
    k.op().apply_compensated(panel_hi, panel_lo, next_hi, next_lo);
    std::swap(panel_hi, next_hi);
    std::swap(panel_lo, next_lo);
    if (!panel_hi.all_finite())
      throw NonFiniteError("assemble_block_hankel: panel A^" + std::to_string(power) + " G is not finite");
    if (power < 2) continue;

    kernels::parallel::spmm_compensated(k.sketch_transpose(), panel_hi, panel_lo, moment_hi, moment_lo);
    DenseBlock sym_hi(s, s);
    DenseBlock sym_lo(s, s);
    for (Index j = 0; j < s; ++j)
      for (Index i = 0; i < s; ++i) {
        const DoubleDouble v = (DoubleDouble(moment_hi(i, j), moment_lo(i, j)) +
                                DoubleDouble(moment_hi(j, i), moment_lo(j, i))) *
                               0.5;
        sym_hi(i, j) = v.hi;
        sym_lo(i, j) = v.lo;
      }
    if (!sym_hi.all_finite())
      throw NonFiniteError("assemble_block_hankel: moment G^T A^" + std::to_string(power) + " G is not finite");
    h.blocks.push_back(std::move(sym_hi));
    h.tails.push_back(std::move(sym_lo));
  }
  return h;
}

SpectralSummary krylov_spectrum(const KrylovOperator& k) { return svd_summary(k.materialize()); }

}  // namespace bkr
