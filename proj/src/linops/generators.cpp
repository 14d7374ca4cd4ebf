// Copyright (c) bkrylov contributors
// SPDX-License-Identifier: Apache-2.0
#include "bkr/generators.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "bkr/error.hpp"
#include "bkr/rng.hpp"

namespace bkr::gen {

SparseMatrix random_sparse_spd(Index n, double cond, double density, std::uint64_t seed) {
  require(n >= 1, "random_sparse_spd: n must be positive");
  require(cond >= 1.0, "random_sparse_spd: cond must be >= 1");
  require(density >= 0.0 && density <= 1.0, "random_sparse_spd: density must lie in [0, 1]");
  if (n > kDenseCap) throw CapacityError("random_sparse_spd: n exceeds dense cap");

  CounterRng rng = SeedPath(seed, {0x5bd1e995}).rng();
  std::vector<Triplet> pattern;
  for (Index i = 0; i < n; ++i) {
    pattern.push_back({i, i, rng.normal()});
    for (Index j = i + 1; j < n; ++j) {
      if (rng.uniform() < density) {
        const double v = rng.normal();
        pattern.push_back({i, j, v});
        pattern.push_back({j, i, v});
      }
    }
  }
  const SparseMatrix b = SparseMatrix::from_triplets(n, n, pattern);
  if (n == 1) return SparseMatrix::identity(1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b.to_dense().view(), Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues()(0);
  const double hi = eig.eigenvalues()(static_cast<Eigen::Index>(n) - 1);
  // Maps [lo, hi] onto [1/cond, 1].
  const double target_lo = 1.0 / cond;
  const double scale = hi > lo ? (1.0 - target_lo) / (hi - lo) : 0.0;
  const double shift = target_lo - scale * lo;

  std::vector<Triplet> entries;
  for (const Triplet& t : b.triplets()) entries.push_back({t.row, t.col, scale * t.value});
  for (Index i = 0; i < n; ++i) entries.push_back({i, i, shift});
  return SparseMatrix::from_triplets(n, n, std::move(entries));
}

SparseMatrix rotated_diagonal(const std::vector<double>& eigenvalues, std::uint64_t seed) {
  const Index n = eigenvalues.size();
  require(n >= 1, "rotated_diagonal: empty spectrum");
  if (n > kDenseCap) throw CapacityError("rotated_diagonal: n exceeds dense cap");
  CounterRng rng = SeedPath(seed, {0x2545f491}).rng();
  Eigen::MatrixXd z(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index j = 0; j < z.cols(); ++j)
    for (Eigen::Index i = 0; i < z.rows(); ++i) z(i, j) = rng.normal();
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(z).householderQ();
  Eigen::VectorXd lambda(static_cast<Eigen::Index>(n));
  for (Index i = 0; i < n; ++i) lambda(static_cast<Eigen::Index>(i)) = eigenvalues[i];
  const Eigen::MatrixXd a = q * lambda.asDiagonal() * q.transpose();
  DenseBlock out(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = j; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      const auto jj = static_cast<Eigen::Index>(j);
      const double v = 0.5 * (a(ii, jj) + a(jj, ii));
      out(i, j) = v;
      out(j, i) = v;
    }
  return SparseMatrix::from_dense(out);
}

std::vector<double> separated_spectrum(Index n, double min_gap, std::uint64_t seed) {
  require(n >= 1, "separated_spectrum: n must be positive");
  require(min_gap > 0.0 && static_cast<double>(n) * min_gap < 1.0,
          "separated_spectrum: need 0 < n * min_gap < 1");
  CounterRng rng = SeedPath(seed, {0x9e3779b9}).rng();
  std::vector<double> weights(n);
  double total = 0.0;
  for (double& w : weights) total += (w = 0.5 + rng.uniform());
  const double budget = 1.0 - static_cast<double>(n) * min_gap;
  std::vector<double> out(n);
  double level = 0.0;
  for (Index i = 0; i < n; ++i) {
    level += min_gap + budget * weights[i] / total;
    out[i] = level;
  }
  return out;
}

std::vector<double> gaussian_vector(Index n, std::uint64_t seed) {
  CounterRng rng = SeedPath(seed, {0x7f4a7c15}).rng();
  std::vector<double> out(n);
  for (double& v : out) v = rng.normal();
  return out;
}

}  // namespace bkr::gen
