// Copyright (c) bkrylov contributors
// SPDX-License-Identifier: Apache-2.0
#include "bkr/spectral.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/SVD>

#include "bkr/error.hpp"

namespace bkr {
namespace {

template <typename Matrix>
SpectralSummary summarize(const Matrix& m) {
  require(m.rows() > 0 && m.cols() > 0, "svd_summary: matrix must be nonempty");
  if (static_cast<Index>(std::max(m.rows(), m.cols())) > kDenseCap)
    throw CapacityError("svd_summary: dimension exceeds dense cap of " + std::to_string(kDenseCap));
  if (!m.allFinite()) throw NonFiniteError("svd_summary: non-finite entry");

  Eigen::BDCSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  SpectralSummary out;
  out.singular_values.resize(static_cast<Index>(sv.size()));
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    const double v = sv[i];
    out.singular_values[static_cast<Index>(i)] = v < kSingularFloor ? 0.0 : v;
  }
  out.sigma_min = out.singular_values.back();
  out.condition_number = out.sigma_min > 0.0 ? out.singular_values.front() / out.sigma_min
                                             : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace

SpectralSummary svd_summary(const DenseBlock& m) {
  require(m.rows() > 0 && m.cols() > 0, "svd_summary: matrix must be nonempty");
  return summarize(Eigen::MatrixXd(m.view()));
}

SpectralSummary svd_summary(const Eigen::Ref<const Eigen::MatrixXcd>& m) {
  return summarize(Eigen::MatrixXcd(m));
}

double partial_determinant(const DenseBlock& m, Index k) {
  require(k <= std::min(m.rows(), m.cols()), "partial_determinant: k exceeds min(rows, cols)");
  if (k == 0) return 1.0;
  const SpectralSummary s = svd_summary(m);
  double product = 1.0;
  for (Index i = 0; i < k; ++i) product *= s.singular_values[i];
  return product;
}

}  // namespace bkr
