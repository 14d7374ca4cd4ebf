// Copyright (c) bkrylov contributors
// SPDX-License-Identifier: Apache-2.0
#include "bkr/solver.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "bkr/error.hpp"
#include "bkr/kernels.hpp"
#include "bkr/rng.hpp"
#include "bkr/sketch.hpp"

namespace bkr {

void SolverConfig::validate() const {
  require(m >= 1, "SolverConfig: m must be >= 1");
  require(c_h > 0.0, "SolverConfig: c_h must be positive");
  require(alpha_A > 0.0 && alpha_A < 1.0, "SolverConfig: alpha_A must lie in (0, 1)");
  require(target_residual > 0.0 && target_residual < 1.0, "SolverConfig: target_residual must lie in (0, 1)");
  hankel.validate();
}

void to_json(nlohmann::json& j, const SolverConfig& cfg) {
  j = nlohmann::json{{"m", cfg.m},
                     {"c_h", cfg.c_h},
                     {"alpha_A", cfg.alpha_A},
                     {"seed", cfg.seed},
                     {"target_residual", cfg.target_residual},
                     {"max_retries", cfg.max_retries},
                     {"refine_steps", cfg.refine_steps},
                     {"hankel", cfg.hankel}};
}

void from_json(const nlohmann::json& j, SolverConfig& cfg) {
  try {
    cfg.m = j.value("m", cfg.m);
    cfg.c_h = j.value("c_h", cfg.c_h);
    cfg.alpha_A = j.value("alpha_A", cfg.alpha_A);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.target_residual = j.value("target_residual", cfg.target_residual);
    cfg.max_retries = j.value("max_retries", cfg.max_retries);
    cfg.refine_steps = j.value("refine_steps", cfg.refine_steps);
    if (j.contains("hankel")) j.at("hankel").get_to(cfg.hankel);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("solver config: ") + e.what());
  }
}

nlohmann::json to_json(const SolveReport& report, bool include_solution) {
  nlohmann::json j{{"relative_residual", report.relative_residual},
                   {"retries_used", report.retries_used},
                   {"hankel_iters", report.hankel_iters},
                   {"sketch_nnz", report.sketch_nnz},
                   {"wall_time", report.wall_time},
                   {"padded_n", report.padded_n},
                   {"block_width", report.block_width},
                   {"h", report.h},
                   {"residual_history", report.residual_history}};
  if (include_solution) j["x"] = report.x;
  return j;
}

std::uint64_t sketch_seed_for_retry(std::uint64_t root, Index retry) noexcept {
  return SeedPath(root, {retry}).key();
}

InverseOperator::InverseOperator(OperatorPtr a, const SolverConfig& cfg, std::uint64_t sketch_seed) {
  require(a != nullptr, "InverseOperator: null operator");
  require(a->is_symmetric(), "InverseOperator: operator must be symmetric");
  cfg.validate();
  n_ = a->dimension();
  require(n_ >= 1, "InverseOperator: empty operator");
  const Index padded = round_up_to_multiple(n_, cfg.m);
  padded_ = std::make_shared<PaddedOperator>(std::move(a), padded);
  const SketchShape shape = default_sketch_width_and_density(padded, cfg.m, cfg.alpha_A, cfg.c_h);
  h_ = shape.h;
  SparseMatrix g = sample_sparse_gaussian(SketchSpec{padded, shape.s, shape.h, sketch_seed});
  krylov_ = std::make_unique<KrylovOperator>(padded_, std::move(g), cfg.m);
  hankel_ = std::make_unique<HankelSolver>(assemble_block_hankel(*krylov_), cfg.hankel);
}

std::vector<double> InverseOperator::apply_with_stats(std::span<const double> b, InverseApplyStats& stats) const {
  require_dims(b.size() == n_, "InverseOperator::apply: rhs length must equal n");
  const Index padded = padded_dimension();
  std::vector<double> bp(padded, 0.0);
  std::copy(b.begin(), b.end(), bp.begin());
  std::vector<double> ab(padded);
  padded_->apply(bp, ab, 0.0);
  const std::vector<double> rhs = krylov_->apply_transpose(ab);

  HankelSolveResult solved;
  try {
    solved = hankel_->solve(rhs);
    stats.hankel_converged = true;
  } catch (const IllConditionedSystem& e) {
    solved = e.best();
    stats.hankel_converged = false;
  }
  stats.hankel_iters = solved.iters;
  stats.hankel_residual = solved.achieved_residual;
  stats.mode_used = solved.mode_used;

  std::vector<double> x = krylov_->apply(solved.y);
  x.resize(n_);
  return x;
}

void InverseOperator::apply(std::span<const double> b, std::span<double> x, double) const {
  require_dims(x.size() == n_, "InverseOperator::apply: output length must equal n");
  InverseApplyStats stats;
  const std::vector<double> out = apply_with_stats(b, stats);
  std::copy(out.begin(), out.end(), x.begin());
}

std::shared_ptr<const InverseOperator> build_inverse_operator(OperatorPtr a, const SolverConfig& cfg) {
  try {
    return std::make_shared<const InverseOperator>(std::move(a), cfg, sketch_seed_for_retry(cfg.seed, 0));
  } catch (const NonFiniteError& e) {
    throw SolverFailure(std::string("build_inverse_operator: ") + e.what(), SolveReport{});
  }
}

namespace {

double relative_residual(const LinearOperator& a, std::span<const double> x, std::span<const double> b,
                         double b_norm, std::vector<double>& r) {
  a.apply(x, r, 0.0);
  for (Index i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  const double rn = norm2(r);
  return std::isfinite(rn) ? rn / b_norm : std::numeric_limits<double>::infinity();
}

}  // namespace

SolveReport simplified_block_krylov_solve(OperatorPtr a, std::span<const double> b, const SolverConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  require(a != nullptr, "simplified_block_krylov_solve: null operator");
  cfg.validate();
  require(a->is_symmetric(), "simplified_block_krylov_solve: operator must be symmetric");
  const Index n = a->dimension();
  require_dims(b.size() == n, "simplified_block_krylov_solve: b length must equal n");
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };

  const double b_norm = norm2(b);
  SolveReport best;
  best.relative_residual = std::numeric_limits<double>::infinity();
  if (b_norm == 0.0) {
    best.x.assign(n, 0.0);
    best.relative_residual = 0.0;
    best.padded_n = round_up_to_multiple(n, cfg.m);
    best.block_width = best.padded_n / cfg.m;
    best.wall_time = elapsed();
    return best;
  }

  std::vector<double> r(n);
  std::string last_error;
  Index attempts = 0;
  for (Index retry = 0; retry <= cfg.max_retries; ++retry) {
    ++attempts;
    std::unique_ptr<InverseOperator> inv;
    try {
      inv = std::make_unique<InverseOperator>(a, cfg, sketch_seed_for_retry(cfg.seed, retry));
    } catch (const NonFiniteError& e) {
      last_error = e.what();
      continue;
    }
    SolveReport attempt;
    attempt.retries_used = retry;
    attempt.sketch_nnz = inv->krylov().sketch().nnz();
    attempt.padded_n = inv->padded_dimension();
    attempt.block_width = inv->krylov().block_width();
    attempt.h = inv->h();

    InverseApplyStats stats;
    std::vector<double> x = inv->apply_with_stats(b, stats);
    attempt.hankel_iters += stats.hankel_iters;
    double res = relative_residual(*a, x, b, b_norm, r);
    attempt.residual_history.push_back(res);
    std::vector<double> best_x = x;
    double best_res = res;
    for (Index step = 0; step < cfg.refine_steps && best_res > 0.0; ++step) {
      const std::vector<double> dx = inv->apply_with_stats(r, stats);
      attempt.hankel_iters += stats.hankel_iters;
      for (Index i = 0; i < n; ++i) x[i] += dx[i];
      res = relative_residual(*a, x, b, b_norm, r);
      attempt.residual_history.push_back(res);
      if (res < best_res) {
        best_res = res;
        best_x = x;
      } else {
        // Divergent correction: continue from the best iterate.
        x = best_x;
        relative_residual(*a, x, b, b_norm, r);
      }
    }
    attempt.x = std::move(best_x);
    attempt.relative_residual = relative_residual(*a, attempt.x, b, b_norm, r);
    if (attempt.relative_residual < best.relative_residual || best.x.empty()) best = std::move(attempt);
    if (best.relative_residual <= cfg.target_residual) break;
  }
  best.retries_used = attempts - 1;
  best.wall_time = elapsed();
  if (best.x.empty()) throw SolverFailure("simplified_block_krylov_solve: no sketch attempt succeeded: " + last_error, best);
  if (!(best.relative_residual <= cfg.target_residual))
    throw SolverFailure("simplified_block_krylov_solve: relative residual " + std::to_string(best.relative_residual) +
                            " above target " + std::to_string(cfg.target_residual),
                        best);
  return best;
}

}  // namespace bkr
