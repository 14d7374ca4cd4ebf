// Copyright (c) bkrylov contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bkr/double_double.hpp"
#include "bkr/krylov.hpp"

namespace bkr {

enum class HankelMode { structured_cg, dense_ldl, automatic };

std::string to_string(HankelMode mode);
HankelMode hankel_mode_from_string(const std::string& name);

inline constexpr double kMinHankelTol = 1e-14;

struct HankelSolveConfig {
  double tol = 1e-10;
  Index max_iters = 500;
  HankelMode mode = HankelMode::automatic;
  /// Extra diagonal shift, as a multiple of trace(H)/(m s), added before any
  /// ladder shift.
  double regularization = 0.0;
  /// Optional per-iteration hook for the CG path: (iteration, current iterate).
  std::function<void(Index, std::span<const double>)> observer;

  void validate() const;
  double effective_tol() const noexcept { return tol < kMinHankelTol ? kMinHankelTol : tol; }
};

void to_json(nlohmann::json& j, const HankelSolveConfig& cfg);
void from_json(const nlohmann::json& j, HankelSolveConfig& cfg);

/// H v in O(m log m) block operations: reversing the block order of v turns
/// the Hankel product into a block convolution with the symbol
/// (B_0, ..., B_{2m-2}), evaluated by real FFTs of length L >= 2m (power of 2).
class FastHankelOperator {
 public:
  explicit FastHankelOperator(const BlockHankelMatrix& h);
  ~FastHankelOperator();
  FastHankelOperator(const FastHankelOperator&) = delete;
  FastHankelOperator& operator=(const FastHankelOperator&) = delete;

  Index s() const noexcept { return s_; }
  Index m() const noexcept { return m_; }
  Index dimension() const noexcept { return s_ * m_; }
  Index fft_length() const noexcept { return length_; }

  void apply(std::span<const double> v, std::span<double> out) const;
  std::vector<double> apply(std::span<const double> v) const;

 private:
  struct Plans;
  Index s_;
  Index m_;
  Index length_;
  // symbol_[f * s * s + a * s + b]: transform of the (a, b) entry sequence.
  std::vector<std::complex<double>> symbol_;
  std::unique_ptr<Plans> plans_;
};

std::vector<double> fast_hankel_matvec(const FastHankelOperator& op, std::span<const double> v);

/// Reference O(m^2 s^2) product with the expanded matrix.
class DenseHankelOperator {
 public:
  explicit DenseHankelOperator(const BlockHankelMatrix& h);
  Index dimension() const noexcept { return dense_.rows(); }
  void apply(std::span<const double> v, std::span<double> out) const;
  std::vector<double> apply(std::span<const double> v) const;
  const DenseBlock& matrix() const noexcept { return dense_; }

 private:
  DenseBlock dense_;
};

/// ||H y - rhs||_2 evaluated blockwise in double-double from blocks + tails.
double hankel_residual_norm(const BlockHankelMatrix& h, std::span<const double> y,
                            std::span<const double> rhs);

struct HankelSolveResult {
  std::vector<double> y;
  double achieved_residual = 0.0;  // ||H y - rhs|| / ||rhs||, recomputed
  Index iters = 0;
  HankelMode mode_used = HankelMode::structured_cg;
  double shift = 0.0;              // absolute diagonal shift of the accepted solve
  std::vector<double> residual_history;  // CG recurrence residual norms
};

/// No mode reached the residual target; carries the best attempt.
class IllConditionedSystem : public std::runtime_error {
 public:
  IllConditionedSystem(const std::string& what, HankelSolveResult best)
      : std::runtime_error(what), best_(std::move(best)) {}
  const HankelSolveResult& best() const noexcept { return best_; }

 private:
  HankelSolveResult best_;
};

/// Reusable solver for one block Hankel matrix; factorizations are built on
/// first use and shared by later solves. Safe for concurrent `solve` calls.
///
/// structured-cg: block-Jacobi preconditioned CG with the FFT product.
/// dense-ldl: LDL^T of the double-double expansion with the shift ladder
///   {0, 1e-14, 1e-10, 1e-6} * trace(H)/(m s) and refinement sweeps.
/// automatic: structured-cg, then dense-ldl.
class HankelSolver {
 public:
  HankelSolver(BlockHankelMatrix h, HankelSolveConfig cfg);
  ~HankelSolver();

  const BlockHankelMatrix& matrix() const noexcept { return h_; }
  const FastHankelOperator& fast_operator() const noexcept { return *fast_; }
  const HankelSolveConfig& config() const noexcept { return cfg_; }

  HankelSolveResult solve(std::span<const double> rhs) const;

 private:
  struct DenseFactor;
  HankelSolveResult solve_cg(std::span<const double> rhs) const;
  HankelSolveResult solve_dense(std::span<const double> rhs) const;
  const DenseFactor* dense_factor(Index rung) const;

  BlockHankelMatrix h_;
  HankelSolveConfig cfg_;
  std::unique_ptr<FastHankelOperator> fast_;
  std::vector<Eigen::LLT<Eigen::MatrixXd>> jacobi_;
  double trace_scale_ = 0.0;
  mutable std::mutex factor_mutex_;
  mutable std::vector<std::unique_ptr<DenseFactor>> factors_;
};

/// One-shot convenience wrapper around HankelSolver.
HankelSolveResult solve_hankel(const BlockHankelMatrix& h, std::span<const double> rhs,
                               const HankelSolveConfig& cfg);

}  // namespace bkr
