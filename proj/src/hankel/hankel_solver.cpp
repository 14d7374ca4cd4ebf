// Copyright (c) bkrylov contributors
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "bkr/error.hpp"
#include "bkr/hankel.hpp"
#include "bkr/kernels.hpp"

namespace bkr {
namespace {

constexpr std::array<double, 4> kShiftLadder = {0.0, 1e-14, 1e-10, 1e-6};
constexpr Index kRefinementSweeps = 3;
constexpr Index kStagnationWindow = 50;

}  // namespace

std::string to_string(HankelMode mode) {
  switch (mode) {
    case HankelMode::structured_cg: return "structured-cg";
    case HankelMode::dense_ldl: return "dense-ldl";
    case HankelMode::automatic: return "auto";
  }
  return "auto";
}

HankelMode hankel_mode_from_string(const std::string& name) {
  if (name == "structured-cg") return HankelMode::structured_cg;
  if (name == "dense-ldl") return HankelMode::dense_ldl;
  if (name == "auto") return HankelMode::automatic;
  throw ParseError("unknown Hankel solve mode '" + name + "'");
}

void HankelSolveConfig::validate() const {
  require(tol > 0.0 && tol < 1.0, "HankelSolveConfig: tol must lie in (0, 1)");
  require(max_iters >= 1, "HankelSolveConfig: max_iters must be >= 1");
  require(regularization >= 0.0, "HankelSolveConfig: regularization must be >= 0");
}

void to_json(nlohmann::json& j, const HankelSolveConfig& cfg) {
  j = nlohmann::json{{"tol", cfg.tol},
                     {"max_iters", cfg.max_iters},
                     {"mode", to_string(cfg.mode)},
                     {"regularization", cfg.regularization}};
}

void from_json(const nlohmann::json& j, HankelSolveConfig& cfg) {
  cfg.tol = j.value("tol", cfg.tol);
  cfg.max_iters = j.value("max_iters", cfg.max_iters);
  if (j.contains("mode")) cfg.mode = hankel_mode_from_string(j.at("mode").get<std::string>());
  cfg.regularization = j.value("regularization", cfg.regularization);
}

/// LDL^T of (H + shift I) in double-double, rows of L stored contiguously.
struct HankelSolver::DenseFactor {
  Index dim = 0;
  double shift = 0.0;
  bool ok = false;
  std::vector<DoubleDouble> lower;  // row-major, unit diagonal implied
  std::vector<DoubleDouble> diag;

  void factor(const BlockHankelMatrix& h, double shift_value) {
    dim = h.dimension();
    shift = shift_value;
    const Index s = h.s;
    lower.assign(dim * dim, DoubleDouble());
    diag.assign(dim, DoubleDouble());
    auto entry = [&](Index i, Index j) {
      const Index t = i / s + j / s;
      DoubleDouble v(h.blocks[t](i % s, j % s), h.tails.empty() ? 0.0 : h.tails[t](i % s, j % s));
      if (i == j) v += DoubleDouble(shift);
      return v;
    };
    std::vector<DoubleDouble> scaled(dim);
    for (Index j = 0; j < dim; ++j) {
      const DoubleDouble* lj = lower.data() + j * dim;
      DoubleDouble d = entry(j, j);
      for (Index k = 0; k < j; ++k) {
        scaled[k] = lj[k] * diag[k];
        d -= lj[k] * scaled[k];
      }
      if (!(d.hi > 0.0) || !is_finite(d)) return;
      diag[j] = d;
      lower[j * dim + j] = DoubleDouble(1.0);
      const auto rows = static_cast<std::int64_t>(dim);
#pragma omp parallel for schedule(static) if ((dim - j) * j > 32768)
      for (std::int64_t ii = static_cast<std::int64_t>(j) + 1; ii < rows; ++ii) {
        const auto i = static_cast<Index>(ii);
        DoubleDouble* li = lower.data() + i * dim;
        DoubleDouble acc = entry(i, j);
        for (Index k = 0; k < j; ++k) acc -= li[k] * scaled[k];
        li[j] = acc / d;
      }
    }
    ok = true;
  }

  std::vector<DoubleDouble> solve(const std::vector<DoubleDouble>& b) const {
    std::vector<DoubleDouble> z(b);
    for (Index i = 0; i < dim; ++i) {
      const DoubleDouble* li = lower.data() + i * dim;
      DoubleDouble acc = z[i];
      for (Index k = 0; k < i; ++k) acc -= li[k] * z[k];
      z[i] = acc;
    }
    for (Index i = 0; i < dim; ++i) z[i] = z[i] / diag[i];
    for (Index i = dim; i-- > 0;) {
      DoubleDouble acc = z[i];
      for (Index k = i + 1; k < dim; ++k) acc -= lower[k * dim + i] * z[k];
      z[i] = acc;
    }
    return z;
  }
};

namespace {

/// rhs - H y in double-double with y = y_hi + y_lo.
std::vector<DoubleDouble> residual_dd(const BlockHankelMatrix& h, const std::vector<DoubleDouble>& y,
                                      std::span<const double> rhs) {
  const Index s = h.s;
  const Index dim = h.dimension();
  std::vector<DoubleDouble> r(dim);
  const auto rows = static_cast<std::int64_t>(dim);
#pragma omp parallel for schedule(static) if (dim * dim > 16384)
  for (std::int64_t rr = 0; rr < rows; ++rr) {
    const auto row = static_cast<Index>(rr);
    const Index bi = row / s;
    const Index a = row % s;
    DoubleDouble acc(rhs[row]);
    for (Index bj = 0; bj < h.m; ++bj) {
      const DenseBlock& hi = h.blocks[bi + bj];
      for (Index b = 0; b < s; ++b) {
        const DoubleDouble entry(hi(a, b), h.tails.empty() ? 0.0 : h.tails[bi + bj](a, b));
        acc -= entry * y[bj * s + b];
      }
    }
    r[row] = acc;
  }
  return r;
}

std::vector<double> rounded(const std::vector<DoubleDouble>& v) {
  std::vector<double> out(v.size());
  for (Index i = 0; i < v.size(); ++i) out[i] = v[i].to_double();
  return out;
}

bool better(const HankelSolveResult& a, const HankelSolveResult& b) {
  return a.achieved_residual < b.achieved_residual || std::isnan(b.achieved_residual);
}

}  // namespace

HankelSolver::HankelSolver(BlockHankelMatrix h, HankelSolveConfig cfg) : h_(std::move(h)), cfg_(std::move(cfg)) {
  cfg_.validate();
  fast_ = std::make_unique<FastHankelOperator>(h_);
  const Index s = h_.s;
  double trace = 0.0;
  for (Index i = 0; i < h_.m; ++i) {
    const DenseBlock& d = h_.block(i, i);
    d.require_finite("HankelSolver: diagonal block");
    double block_trace = 0.0;
    for (Index k = 0; k < s; ++k) block_trace += d(k, k);
    trace += block_trace;
    Eigen::MatrixXd dense = d.view();
    Eigen::LLT<Eigen::MatrixXd> llt(dense);
    double bump = std::max(block_trace / static_cast<double>(s), std::numeric_limits<double>::min()) * 1e-14;
    while (llt.info() != Eigen::Success && bump < 1e300) {
      llt.compute(dense + bump * Eigen::MatrixXd::Identity(dense.rows(), dense.cols()));
      bump *= 100.0;
    }
    jacobi_.push_back(std::move(llt));
  }
  trace_scale_ = trace / static_cast<double>(h_.dimension());
  factors_.resize(kShiftLadder.size());
}

HankelSolver::~HankelSolver() = default;

const HankelSolver::DenseFactor* HankelSolver::dense_factor(Index rung) const {
  if (h_.dimension() > kDenseCap) throw CapacityError("HankelSolver: dense-ldl dimension exceeds dense cap");
  std::lock_guard lock(factor_mutex_);
  if (!factors_[rung]) {
    auto f = std::make_unique<DenseFactor>();
    const double shift = (cfg_.regularization + kShiftLadder[rung]) * trace_scale_;
    f->factor(h_, shift);
    factors_[rung] = std::move(f);
  }
  return factors_[rung]->ok ? factors_[rung].get() : nullptr;
}

HankelSolveResult HankelSolver::solve_cg(std::span<const double> rhs) const {
  const Index dim = h_.dimension();
  const Index s = h_.s;
  const double rhs_norm = norm2(rhs);
  const double target = cfg_.effective_tol() * rhs_norm;
  const double shift = cfg_.regularization * trace_scale_;

  auto precondition = [&](const std::vector<double>& r, std::vector<double>& z) {
    for (Index i = 0; i < h_.m; ++i) {
      Eigen::Map<const Eigen::VectorXd> ri(r.data() + i * s, static_cast<Eigen::Index>(s));
      Eigen::Map<Eigen::VectorXd> zi(z.data() + i * s, static_cast<Eigen::Index>(s));
      zi = jacobi_[i].solve(ri);
    }
  };
  auto apply_h = [&](const std::vector<double>& v, std::vector<double>& out) {
    fast_->apply(v, out);
    if (shift != 0.0)
      for (Index i = 0; i < dim; ++i) out[i] += shift * v[i];
  };

  HankelSolveResult result;
  result.mode_used = HankelMode::structured_cg;
  std::vector<double> x(dim, 0.0);
  std::vector<double> r(rhs.begin(), rhs.end());
  std::vector<double> z(dim), p(dim), q(dim);
  precondition(r, z);
  p = z;
  double rz = dot(r, z);
  double best = std::numeric_limits<double>::infinity();
  Index best_iter = 0;
  for (Index it = 1; it <= cfg_.max_iters; ++it) {
    apply_h(p, q);
    const double pq = dot(p, q);
    if (!(pq > 0.0) || !std::isfinite(pq)) break;
    const double step = rz / pq;
    for (Index i = 0; i < dim; ++i) {
      x[i] += step * p[i];
      r[i] -= step * q[i];
    }
    const double rn = norm2(r);
    result.iters = it;
    result.residual_history.push_back(rn);
    if (cfg_.observer) cfg_.observer(it, x);
    if (rn <= target) break;
    if (rn < best) {
      best = rn;
      best_iter = it;
    } else if (it - best_iter > kStagnationWindow) {
      break;
    }
    precondition(r, z);
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (Index i = 0; i < dim; ++i) p[i] = z[i] + beta * p[i];
  }
  result.y = std::move(x);
  result.achieved_residual = rhs_norm > 0.0 ? hankel_residual_norm(h_, result.y, rhs) / rhs_norm : 0.0;
  return result;
}

HankelSolveResult HankelSolver::solve_dense(std::span<const double> rhs) const {
  const Index dim = h_.dimension();
  const double rhs_norm = norm2(rhs);
  for (Index rung = 0; rung < kShiftLadder.size(); ++rung) {
    const DenseFactor* factor = dense_factor(rung);
    if (!factor) continue;
    std::vector<DoubleDouble> b(dim);
    for (Index i = 0; i < dim; ++i) b[i] = DoubleDouble(rhs[i]);
    std::vector<DoubleDouble> y = factor->solve(b);
    for (Index sweep = 0; sweep < kRefinementSweeps; ++sweep) {
      const std::vector<DoubleDouble> correction = factor->solve(residual_dd(h_, y, rhs));
      for (Index i = 0; i < dim; ++i) y[i] += correction[i];
    }
    HankelSolveResult result;
    result.mode_used = HankelMode::dense_ldl;
    result.shift = factor->shift;
    result.iters = 1 + kRefinementSweeps;
    result.y = rounded(y);
    result.achieved_residual = hankel_residual_norm(h_, result.y, rhs) / rhs_norm;
    return result;
  }
  HankelSolveResult failed;
  failed.mode_used = HankelMode::dense_ldl;
  failed.y.assign(dim, 0.0);
  failed.achieved_residual = 1.0;
  return failed;
}

HankelSolveResult HankelSolver::solve(std::span<const double> rhs) const {
  const Index dim = h_.dimension();
  require_dims(rhs.size() == dim, "solve_hankel: rhs length must be m * s");
  for (double v : rhs)
    if (!std::isfinite(v)) throw NonFiniteError("solve_hankel: non-finite rhs");
  const double rhs_norm = norm2(rhs);
  if (rhs_norm == 0.0) {
    HankelSolveResult zero;
    zero.y.assign(dim, 0.0);
    zero.mode_used = cfg_.mode == HankelMode::dense_ldl ? HankelMode::dense_ldl : HankelMode::structured_cg;
    return zero;
  }
  const double tol = cfg_.effective_tol();

  HankelSolveResult best;
  best.achieved_residual = std::numeric_limits<double>::quiet_NaN();
  if (cfg_.mode != HankelMode::dense_ldl) {
    HankelSolveResult cg = solve_cg(rhs);
    if (cg.achieved_residual <= tol) return cg;
    best = std::move(cg);
  }
  if (cfg_.mode != HankelMode::structured_cg) {
    HankelSolveResult dense = solve_dense(rhs);
    dense.iters += best.iters;
    if (dense.achieved_residual <= tol) return dense;
    if (better(dense, best)) {
      dense.residual_history = std::move(best.residual_history);
      best = std::move(dense);
    }
  }
  throw IllConditionedSystem("solve_hankel: residual target " + std::to_string(tol) +
                                 " not reached (best " + std::to_string(best.achieved_residual) + ")",
                             std::move(best));
}

HankelSolveResult solve_hankel(const BlockHankelMatrix& h, std::span<const double> rhs,
                               const HankelSolveConfig& cfg) {
  return HankelSolver(h, cfg).solve(rhs);
}

}  // namespace bkr
