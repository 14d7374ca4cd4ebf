// Copyright (c) bkrylov contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "bkr/hankel.hpp"
#include "bkr/krylov.hpp"
#include "bkr/operator.hpp"

namespace bkr {

struct SolverConfig {
  Index m = 4;                    // Krylov step count
  double c_h = 1.0;               // sketch density constant
  double alpha_A = 1e-6;          // eigenvalue range/separation proxy, only feeds h
  std::uint64_t seed = 0;
  double target_residual = 1e-8;  // on ||Ax - b|| / ||b||
  Index max_retries = 1;          // fresh sketches after the first
  Index refine_steps = 2;
  HankelSolveConfig hankel;

  void validate() const;
};

void to_json(nlohmann::json& j, const SolverConfig& cfg);
void from_json(const nlohmann::json& j, SolverConfig& cfg);

struct SolveReport {
  std::vector<double> x;
  double relative_residual = 0.0;
  Index retries_used = 0;
  Index hankel_iters = 0;
  Index sketch_nnz = 0;
  double wall_time = 0.0;  // seconds
  Index padded_n = 0;
  Index block_width = 0;
  double h = 0.0;
  std::vector<double> residual_history;  // after the initial solve and each refinement
};

nlohmann::json to_json(const SolveReport& report, bool include_solution = false);

class SolverFailure : public std::runtime_error {
 public:
  SolverFailure(const std::string& what, SolveReport best)
      : std::runtime_error(what), best_(std::move(best)) {}
  const SolveReport& best() const noexcept { return best_; }

 private:
  SolveReport best_;
};

/// Per-application statistics of the inverse operator.
struct InverseApplyStats {
  Index hankel_iters = 0;
  double hankel_residual = 0.0;
  HankelMode mode_used = HankelMode::structured_cg;
  bool hankel_converged = true;
};

/// b -> K Solve_H((AK)^T b): sketch, Krylov operator and Hankel solver built
/// once, applied to any number of right-hand sides. Immutable after
/// construction; apply is safe to call concurrently.
class InverseOperator final : public LinearOperator {
 public:
  InverseOperator(OperatorPtr a, const SolverConfig& cfg, std::uint64_t sketch_seed);

  Index dimension() const noexcept override { return n_; }
  bool is_symmetric() const noexcept override { return false; }
  using LinearOperator::apply;
  void apply(std::span<const double> b, std::span<double> x, double delta = 0.0) const override;
  std::vector<double> apply_with_stats(std::span<const double> b, InverseApplyStats& stats) const;

  const KrylovOperator& krylov() const noexcept { return *krylov_; }
  const HankelSolver& hankel() const noexcept { return *hankel_; }
  Index padded_dimension() const noexcept { return padded_->dimension(); }
  double h() const noexcept { return h_; }

 private:
  Index n_;
  std::shared_ptr<const PaddedOperator> padded_;
  double h_;
  std::unique_ptr<KrylovOperator> krylov_;
  std::unique_ptr<HankelSolver> hankel_;
};

/// Inverse operator for the first sketch (retry 0) of cfg.seed.
std::shared_ptr<const InverseOperator> build_inverse_operator(OperatorPtr a,
                                                              const SolverConfig& cfg);

/// Solve with residual-driven sketch retries and iterative refinement.
/// Throws SolverFailure (carrying the best report) when every attempt ends
/// above cfg.target_residual.
SolveReport simplified_block_krylov_solve(OperatorPtr a, std::span<const double> b,
                                          const SolverConfig& cfg);

/// Seed of the sketch used by attempt `retry`.
std::uint64_t sketch_seed_for_retry(std::uint64_t root, Index retry) noexcept;

}  // namespace bkr
