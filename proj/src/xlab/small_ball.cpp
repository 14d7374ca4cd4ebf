// Copyright (c) bkrylov contributors
// SPDX-License-Identifier: Apache-2.0
#include "bkr/xlab/small_ball.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bkr/error.hpp"

namespace bkr::xlab {

std::string to_string(MatrixTypeTag tag) {
  switch (tag) {
    case MatrixTypeTag::real: return "real";
    case MatrixTypeTag::complex: return "complex";
    case MatrixTypeTag::real_symmetric: return "real-symmetric";
    case MatrixTypeTag::self_adjoint: return "self-adjoint";
  }
  return "real";
}

MatrixTypeTag matrix_type_from_string(const std::string& name) {
  if (name == "real") return MatrixTypeTag::real;
  if (name == "complex") return MatrixTypeTag::complex;
  if (name == "real-symmetric") return MatrixTypeTag::real_symmetric;
  if (name == "self-adjoint") return MatrixTypeTag::self_adjoint;
  throw std::invalid_argument("unknown matrix type '" + name + "'");
}

CVector random_unit_vector(Index m, bool real, CounterRng& rng) {
  require(m >= 1, "random_unit_vector: dimension must be positive");
  CVector v(static_cast<Eigen::Index>(m));
  for (;;) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double re = rng.normal();
      const double im = real ? 0.0 : rng.normal();
      v[i] = {re, im};
    }
    const double nrm = v.norm();
    if (nrm > 0.0) return v / nrm;
  }
}

namespace {

nlohmann::json vector_json(const CVector& v, bool real) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (real) {
      out.push_back(v[i].real());
    } else {
      out.push_back({v[i].real(), v[i].imag()});
    }
  }
  return out;
}

// All samples stacked row-block-wise: rows [t*m, (t+1)*m) hold M_t.
struct SampleBank {
  Index m = 0;
  Index count = 0;
  CMatrix stacked;
};

SampleBank draw_samples(const MatrixSampler& sampler, Index count, std::uint64_t seed) {
  SampleBank bank;
  bank.count = count;
  CounterRng first = SeedPath(seed, {0, 0}).rng();
  CMatrix m0 = sampler(first);
  require(m0.rows() == m0.cols() && m0.rows() >= 1, "small-ball sampler must return a square matrix");
  bank.m = static_cast<Index>(m0.rows());
  const auto m = static_cast<Eigen::Index>(bank.m);
  bank.stacked.resize(m * static_cast<Eigen::Index>(count), m);
  bank.stacked.topRows(m) = m0;
  for (Index t = 1; t < count; ++t) {
    CounterRng rng = SeedPath(seed, {0, t}).rng();
    CMatrix mt = sampler(rng);
    require(mt.rows() == m && mt.cols() == m, "small-ball sampler changed dimension");
    bank.stacked.middleRows(static_cast<Eigen::Index>(t) * m, m) = mt;
  }
  return bank;
}

struct Pair {
  CVector x;
  CVector y;
  std::vector<double> magnitudes;  // |x* M_t y| per sample
  double moment = 0.0;
};

void evaluate(const SampleBank& bank, Pair& p) {
  const auto m = static_cast<Eigen::Index>(bank.m);
  const Eigen::VectorXcd my = bank.stacked * p.y;
  p.magnitudes.resize(bank.count);
  double sum = 0.0;
  for (Index t = 0; t < bank.count; ++t) {
    const std::complex<double> w = p.x.dot(my.segment(static_cast<Eigen::Index>(t) * m, m));
    const double a = std::abs(w);
    p.magnitudes[t] = a;
    sum += a * a;
  }
  p.moment = sum / static_cast<double>(bank.count);
}

double exceed_fraction(const std::vector<double>& mags, double alpha) {
  Index hits = 0;
  for (double a : mags) hits += (a > alpha) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(mags.size());
}

Pair make_pair(CVector x, CVector y, MatrixTypeTag tag) {
  Pair p;
  if (diagonal_pairs(tag)) y = x;
  p.x = std::move(x);
  p.y = std::move(y);
  return p;
}

void perturb(CVector& v, Index coord, double step, bool real, CounterRng& rng) {
  const double re = rng.normal();
  const double im = real ? 0.0 : rng.normal();
  v[static_cast<Eigen::Index>(coord)] += step * std::complex<double>(re, im);
  const double nrm = v.norm();
  if (nrm > 0.0) v /= nrm;
}

std::vector<Pair> visit_pairs(const SampleBank& bank, const SmallBallConfig& cfg) {
  const bool real = real_pairs(cfg.tag);
  std::vector<Pair> visited;
  visited.reserve(cfg.n_directions + cfg.descent_steps);
  for (Index d = 0; d < cfg.n_directions; ++d) {
    CounterRng rng = SeedPath(cfg.seed, {1, d}).rng();
    CVector x = random_unit_vector(bank.m, real, rng);
    CVector y = diagonal_pairs(cfg.tag) ? x : random_unit_vector(bank.m, real, rng);
    Pair p = make_pair(std::move(x), std::move(y), cfg.tag);
    evaluate(bank, p);
    visited.push_back(std::move(p));
  }
  if (diagonal_pairs(cfg.tag)) {
    for (Index i = 0; i < bank.m; ++i) {
      CVector e = CVector::Zero(static_cast<Eigen::Index>(bank.m));
      e[static_cast<Eigen::Index>(i)] = 1.0;
      Pair p = make_pair(e, e, cfg.tag);
      evaluate(bank, p);
      visited.push_back(std::move(p));
    }
  }
  if (cfg.descent_steps == 0) return visited;

  Index best = 0;
  for (Index i = 1; i < visited.size(); ++i) {
    if (visited[i].moment < visited[best].moment) best = i;
  }
  Pair current = visited[best];
  double step = 0.5;
  CounterRng rng = SeedPath(cfg.seed, {2}).rng();
  for (Index k = 0; k < cfg.descent_steps; ++k) {
    CVector x = current.x;
    CVector y = current.y;
    const bool move_y = !diagonal_pairs(cfg.tag) && (rng.below(2) == 1);
    const Index coord = rng.below(bank.m);
    perturb(move_y ? y : x, coord, step, real, rng);
    Pair cand = make_pair(std::move(x), std::move(y), cfg.tag);
    evaluate(bank, cand);
    if (cand.moment < current.moment) {
      current = cand;
      step = std::min(1.0, step * 1.25);
    } else {
      step = std::max(1e-3, step * 0.7);
    }
    visited.push_back(std::move(cand));
  }
  return visited;
}

void validate(const SmallBallConfig& cfg, double alpha) {
  require(std::isfinite(alpha) && alpha >= 0.0, "small-ball alpha must be finite and >= 0");
  require(cfg.n_directions >= 1, "small-ball n_directions must be >= 1");
  require(cfg.n_samples >= 1, "small-ball n_samples must be >= 1");
}

}  // namespace

nlohmann::json to_json(const SmallBallEstimate& e) {
  const bool real = e.worst_x.imag().isZero(0.0) && e.worst_y.imag().isZero(0.0);
  return {{"alpha", e.alpha},
          {"beta_hat", e.beta_hat},
          {"n_directions", e.n_directions},
          {"n_matrix_samples", e.n_matrix_samples},
          {"evaluated_pairs", e.pair_probabilities.size()},
          {"worst_x", vector_json(e.worst_x, real)},
          {"worst_y", vector_json(e.worst_y, real)}};
}

std::vector<SmallBallEstimate> estimate_small_ball_curve(const MatrixSampler& sampler,
                                                         const std::vector<double>& alphas,
                                                         const SmallBallConfig& cfg) {
  for (double a : alphas) validate(cfg, a);
  validate(cfg, cfg.alpha);
  const SampleBank bank = draw_samples(sampler, cfg.n_samples, cfg.seed);
  const std::vector<Pair> visited = visit_pairs(bank, cfg);

  std::vector<SmallBallEstimate> out;
  out.reserve(alphas.size());
  for (double alpha : alphas) {
    SmallBallEstimate e;
    e.alpha = alpha;
    e.n_directions = cfg.n_directions;
    e.n_matrix_samples = cfg.n_samples;
    e.beta_hat = std::numeric_limits<double>::infinity();
    Index worst = 0;
    for (Index i = 0; i < visited.size(); ++i) {
      const double p = exceed_fraction(visited[i].magnitudes, alpha);
      e.pair_probabilities.push_back(p);
      if (p < e.beta_hat) {
        e.beta_hat = p;
        worst = i;
      }
    }
    e.worst_x = visited[worst].x;
    e.worst_y = visited[worst].y;
    out.push_back(std::move(e));
  }
  return out;
}

SmallBallEstimate estimate_small_ball(const MatrixSampler& sampler, const SmallBallConfig& cfg) {
  return std::move(estimate_small_ball_curve(sampler, {cfg.alpha}, cfg).front());
}

}  // namespace bkr::xlab
