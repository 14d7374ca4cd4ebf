// Copyright (c) bkrylov contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <vector>

#include "bkr/dense_block.hpp"
#include "bkr/operator.hpp"
#include "bkr/spectral.hpp"

namespace bkr {

/// K = [G | AG | ... | A^{m-1} G], kept implicit: products with K and K^T
/// are evaluated by repeated application of A, never by forming powers.
class KrylovOperator {
 public:
  KrylovOperator(OperatorPtr a, SparseMatrix g, Index steps);

  Index n() const noexcept { return g_.rows(); }
  Index block_width() const noexcept { return g_.cols(); }
  Index steps() const noexcept { return steps_; }
  const LinearOperator& op() const noexcept { return *a_; }
  const OperatorPtr& op_ptr() const noexcept { return a_; }
  const SparseMatrix& sketch() const noexcept { return g_; }
  const SparseMatrix& sketch_transpose() const noexcept { return gt_; }

  /// K y with y stacked as m blocks of length s (Horner evaluation).
  std::vector<double> apply(std::span<const double> y) const;
  /// K^T x stacked as [G^T x; G^T A x; ...; G^T A^{m-1} x].
  std::vector<double> apply_transpose(std::span<const double> x) const;

  /// Cached blocks [G, AG, ...]; populated only when n <= kDenseCap.
  const std::optional<std::vector<DenseBlock>>& cached_blocks() const noexcept { return blocks_; }

  /// Dense n x (m s) copy of K. Throws CapacityError above kDenseCap.
  DenseBlock materialize() const;

 private:
  OperatorPtr a_;
  SparseMatrix g_;
  SparseMatrix gt_;
  Index steps_;
  std::optional<std::vector<DenseBlock>> blocks_;
};

/// Throws DimensionError unless s m = n, and std::invalid_argument when A is
/// not flagged symmetric.
KrylovOperator build_krylov(OperatorPtr a, SparseMatrix g, Index steps);

/// (AK)^T (AK) stored by its 2m - 1 distinct s x s blocks: the (i, j) block
/// is G^T A^{i+j+2} G. Each moment is held as a double-double pair
/// (blocks + tails) so the Gram matrix keeps the precision its squared
/// condition number needs; `blocks` alone is the rounded value.
struct BlockHankelMatrix {
  Index s = 0;
  Index m = 0;
  std::vector<DenseBlock> blocks;
  std::vector<DenseBlock> tails;

  Index dimension() const noexcept { return s * m; }
  const DenseBlock& block(Index i, Index j) const noexcept { return blocks[i + j]; }
  /// Dense (m s) x (m s) expansion of the rounded blocks.
  DenseBlock expand() const;
};

/// Moments M_k = G^T A^k G for k = 2..2m from successive panel applications,
/// symmetrized. Throws NonFiniteError if any moment overflows.
BlockHankelMatrix assemble_block_hankel(const KrylovOperator& k);

/// SVD summary of the materialized K (diagnostics and experiments only).
SpectralSummary krylov_spectrum(const KrylovOperator& k);

}  // namespace bkr
