// Copyright (c) bkrylov contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "bkr/dense_block.hpp"
#include "bkr/xlab/small_ball.hpp"

namespace bkr::xlab {

/// P(|N(0,1)| > a).
double gaussian_two_sided_tail(double a);
/// P(chi^2_1 > a), the small-ball probability of the rank-one Gaussian PSD sampler.
double chi_square_1_tail(double a);

Eigen::MatrixXd gaussian_matrix(Index rows, Index cols, CounterRng& rng);
CMatrix complex_gaussian_matrix(Index rows, Index cols, CounterRng& rng);

MatrixSampler zero_sampler(Index m);
MatrixSampler gaussian_sampler(Index m);
MatrixSampler complex_gaussian_sampler(Index m);
MatrixSampler symmetric_gaussian_sampler(Index m);
MatrixSampler hermitian_gaussian_sampler(Index m);

/// M = M_0 + sum_i g_i M_i with deterministic real coefficient matrices.
struct JointlyGaussianEnsemble {
  Eigen::MatrixXd base;
  std::vector<Eigen::MatrixXd> coefficients;
  MatrixTypeTag tag = MatrixTypeTag::real;

  Index dimension() const noexcept { return static_cast<Index>(base.rows()); }
  Eigen::MatrixXd sample(CounterRng& rng) const;
  MatrixSampler sampler() const;
};

/// M_0 = 0, M_i the m^2 elementary matrices: i.i.d. standard Gaussian entries.
JointlyGaussianEnsemble iid_gaussian_ensemble(Index m);
/// g on the anti-diagonal i + j = m + 1, constant m on i + j = m + 2 (1-based).
JointlyGaussianEnsemble counterexample_ensemble(Index m);

/// The counterexample matrix for a given draw g.
DenseBlock counterexample_matrix(Index m, double g);
/// The same with g = N(0,1) drawn from SeedPath(seed).
DenseBlock counterexample_matrix(Index m, std::uint64_t seed);
double counterexample_draw(std::uint64_t seed);

/// sigma_min of the counterexample matrix without cancellation: reversing its
/// columns gives the bidiagonal g I + m N, whose inverse has the closed form
/// (-m)^{i-j} / g^{i-j+1}; sigma_min = 1 / sigma_max(inverse).
double counterexample_sigma_min(Index m, double g);

/// Independent PSD summand i of a trial.
using PsdSampler = std::function<Eigen::MatrixXd(CounterRng&, Index)>;
/// v v^T with v standard Gaussian in R^m.
PsdSampler rank_one_gaussian_psd(Index m);
PsdSampler fixed_psd(Eigen::MatrixXd matrix);

/// Independent random coefficient matrix M_i of a Gaussian combination.
using CoefficientSampler = std::function<CMatrix(CounterRng&, Index)>;
CoefficientSampler gaussian_coefficients(Index m);
CoefficientSampler fixed_coefficients(std::vector<CMatrix> matrices);

}  // namespace bkr::xlab
