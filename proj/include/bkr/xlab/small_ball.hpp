// Copyright (c) bkrylov contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "bkr/dense_block.hpp"
#include "bkr/rng.hpp"

namespace bkr::xlab {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Matrix type; fixes which unit pairs (x, y) the small-ball infimum ranges over.
enum class MatrixTypeTag { real, complex, real_symmetric, self_adjoint };

std::string to_string(MatrixTypeTag tag);
MatrixTypeTag matrix_type_from_string(const std::string& name);

/// Real and real-symmetric types restrict to real vectors.
constexpr bool real_pairs(MatrixTypeTag t) noexcept {
  return t == MatrixTypeTag::real || t == MatrixTypeTag::real_symmetric;
}
/// Real-symmetric and self-adjoint types restrict to x == y.
constexpr bool diagonal_pairs(MatrixTypeTag t) noexcept {
  return t == MatrixTypeTag::real_symmetric || t == MatrixTypeTag::self_adjoint;
}

/// Draws one matrix sample from the caller's stream.
using MatrixSampler = std::function<CMatrix(CounterRng&)>;

struct SmallBallConfig {
  double alpha = 0.0;
  MatrixTypeTag tag = MatrixTypeTag::real;
  Index n_directions = 32;
  Index n_samples = 10000;
  /// Coordinate-perturbation steps of the local search after random sampling.
  Index descent_steps = 64;
  std::uint64_t seed = 0;
};

struct SmallBallEstimate {
  double alpha = 0.0;
  double beta_hat = 0.0;
  Index n_directions = 0;
  Index n_matrix_samples = 0;
  CVector worst_x;
  CVector worst_y;
  /// Empirical P(|x* M y| > alpha) for every pair evaluated, in visit order.
  std::vector<double> pair_probabilities;
};

nlohmann::json to_json(const SmallBallEstimate& e);

/// Uniform unit vector (real or complex) in dimension m.
CVector random_unit_vector(Index m, bool real, CounterRng& rng);

/// Estimates inf_{(x,y)} P(|x* M y| > alpha) over the admissible pairs of the tag.
///
/// Matrix samples are drawn once and shared by every pair. Candidate pairs
/// are n_directions uniform draws (plus the coordinate vectors when x = y is
/// required) followed by a coordinate-perturbation
/// descent on the empirical second moment E|x* M y|^2, started from the
/// candidate with the smallest moment. The visited set does not depend on
/// alpha, so the estimate is nonincreasing in alpha. The minimum over
/// visited pairs estimates an upper bound on the true infimum.
SmallBallEstimate estimate_small_ball(const MatrixSampler& sampler, const SmallBallConfig& cfg);

/// Same visited pairs evaluated at several thresholds.
std::vector<SmallBallEstimate> estimate_small_ball_curve(const MatrixSampler& sampler,
                                                         const std::vector<double>& alphas,
                                                         const SmallBallConfig& cfg);

}  // namespace bkr::xlab
