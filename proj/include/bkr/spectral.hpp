// Copyright (c) bkrylov contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "bkr/dense_block.hpp"

namespace bkr {

/// Singular values below this are reported as exact zeros.
inline constexpr double kSingularFloor = 1e-300;

struct SpectralSummary {
  std::vector<double> singular_values;  // nonincreasing
  double sigma_min = 0.0;
  double condition_number = 0.0;        // +inf when sigma_min == 0

  double sigma_max() const noexcept { return singular_values.empty() ? 0.0 : singular_values.front(); }
};

/// Singular values of a dense matrix (Householder bidiagonalization followed by
/// divide and conquer). Dimensions above kDenseCap are rejected.
SpectralSummary svd_summary(const DenseBlock& m);
SpectralSummary svd_summary(const Eigen::Ref<const Eigen::MatrixXcd>& m);

/// Product of the k largest singular values; k == 0 gives the empty product 1.
double partial_determinant(const DenseBlock& m, Index k);

}  // namespace bkr
