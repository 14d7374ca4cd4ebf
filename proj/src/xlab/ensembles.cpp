// Copyright (c) bkrylov contributors
// SPDX-License-Identifier: Apache-2.0
#include "bkr/xlab/ensembles.hpp"

#include <cmath>
#include <limits>

#include "bkr/error.hpp"

namespace bkr::xlab {

double gaussian_two_sided_tail(double a) { return std::erfc(a / std::sqrt(2.0)); }

double chi_square_1_tail(double a) {
  require(a >= 0.0, "chi_square_1_tail: threshold must be >= 0");
  return std::erfc(std::sqrt(a / 2.0));
}

Eigen::MatrixXd gaussian_matrix(Index rows, Index cols, CounterRng& rng) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index j = 0; j < out.cols(); ++j)
    for (Eigen::Index i = 0; i < out.rows(); ++i) out(i, j) = rng.normal();
  return out;
}

// Real and imaginary parts each N(0, 1/2) so that E|z|^2 = 1.
CMatrix complex_gaussian_matrix(Index rows, Index cols, CounterRng& rng) {
  CMatrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  const double scale = std::sqrt(0.5);
  for (Eigen::Index j = 0; j < out.cols(); ++j)
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      const double re = rng.normal();
      out(i, j) = {scale * re, scale * rng.normal()};
    }
  return out;
}

MatrixSampler zero_sampler(Index m) {
  return [m](CounterRng&) {
    return CMatrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m)).eval();
  };
}

MatrixSampler gaussian_sampler(Index m) {
  return [m](CounterRng& rng) { return CMatrix(gaussian_matrix(m, m, rng).cast<std::complex<double>>()); };
}

MatrixSampler complex_gaussian_sampler(Index m) {
  return [m](CounterRng& rng) { return complex_gaussian_matrix(m, m, rng); };
}

MatrixSampler symmetric_gaussian_sampler(Index m) {
  return [m](CounterRng& rng) {
    const Eigen::MatrixXd g = gaussian_matrix(m, m, rng);
    return CMatrix(((g + g.transpose()) / 2.0).cast<std::complex<double>>());
  };
}

MatrixSampler hermitian_gaussian_sampler(Index m) {
  return [m](CounterRng& rng) {
    const CMatrix g = complex_gaussian_matrix(m, m, rng);
    return CMatrix((g + g.adjoint()) / 2.0);
  };
}

Eigen::MatrixXd JointlyGaussianEnsemble::sample(CounterRng& rng) const {
  Eigen::MatrixXd out = base;
  for (const auto& c : coefficients) out.noalias() += rng.normal() * c;
  return out;
}

MatrixSampler JointlyGaussianEnsemble::sampler() const {
  return [self = *this](CounterRng& rng) { return CMatrix(self.sample(rng).cast<std::complex<double>>()); };
}

JointlyGaussianEnsemble iid_gaussian_ensemble(Index m) {
  require(m >= 1, "iid_gaussian_ensemble: m must be >= 1");
  const auto d = static_cast<Eigen::Index>(m);
  JointlyGaussianEnsemble e;
  e.base = Eigen::MatrixXd::Zero(d, d);
  e.tag = MatrixTypeTag::real;
  // column-major order matches gaussian_matrix's draw order
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i) {
      Eigen::MatrixXd c = Eigen::MatrixXd::Zero(d, d);
      c(i, j) = 1.0;
      e.coefficients.push_back(std::move(c));
    }
  return e;
}

JointlyGaussianEnsemble counterexample_ensemble(Index m) {
  require(m >= 2, "counterexample_ensemble: m must be >= 2");
  const auto d = static_cast<Eigen::Index>(m);
  JointlyGaussianEnsemble e;
  e.base = Eigen::MatrixXd::Zero(d, d);
  Eigen::MatrixXd anti = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    anti(i, d - 1 - i) = 1.0;
    if (i >= 1) e.base(i, d - i) = static_cast<double>(m);
  }
  e.coefficients.push_back(std::move(anti));
  e.tag = MatrixTypeTag::real_symmetric;
  return e;
}

DenseBlock counterexample_matrix(Index m, double g) {
  require(m >= 2, "counterexample_matrix: m must be >= 2");
  DenseBlock out(m, m);
  for (Index i = 0; i < m; ++i) {
    out(i, m - 1 - i) = g;
    if (i >= 1) out(i, m - i) = static_cast<double>(m);
  }
  return out;
}

double counterexample_draw(std::uint64_t seed) { return SeedPath(seed).rng().normal(); }

DenseBlock counterexample_matrix(Index m, std::uint64_t seed) {
  return counterexample_matrix(m, counterexample_draw(seed));
}

double counterexample_sigma_min(Index m, double g) {
  require(m >= 2, "counterexample_sigma_min: m must be >= 2");
  if (g == 0.0) return 0.0;
  const auto d = static_cast<Eigen::Index>(m);
  const double ratio = -static_cast<double>(m) / g;
  Eigen::MatrixXd inv = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) inv(i, j) = std::pow(ratio, static_cast<double>(i - j)) / g;
  if (!inv.allFinite()) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(inv);
  const double top = svd.singularValues()(0);
  const double sigma = 1.0 / top;
  return sigma < 1e-300 ? 0.0 : sigma;
}

PsdSampler rank_one_gaussian_psd(Index m) {
  return [m](CounterRng& rng, Index) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(m));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
    return Eigen::MatrixXd(v * v.transpose());
  };
}

PsdSampler fixed_psd(Eigen::MatrixXd matrix) {
  return [mat = std::move(matrix)](CounterRng&, Index) { return mat; };
}

CoefficientSampler gaussian_coefficients(Index m) {
  return [m](CounterRng& rng, Index) { return CMatrix(gaussian_matrix(m, m, rng).cast<std::complex<double>>()); };
}

CoefficientSampler fixed_coefficients(std::vector<CMatrix> matrices) {
  require(!matrices.empty(), "fixed_coefficients: need at least one matrix");
  return [mats = std::move(matrices)](CounterRng&, Index i) { return mats[i % mats.size()]; };
}

}  // namespace bkr::xlab
