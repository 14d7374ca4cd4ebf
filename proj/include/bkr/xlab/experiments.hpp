// Copyright (c) bkrylov contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bkr/xlab/ensembles.hpp"
#include "bkr/xlab/small_ball.hpp"

namespace bkr::xlab {

enum class EnsembleKind { psd_sum, jointly_gaussian, gaussian_combination, krylov, counterexample };

std::string to_string(EnsembleKind kind);
EnsembleKind ensemble_kind_from_string(const std::string& name);

struct EnsembleSpec {
  EnsembleKind kind = EnsembleKind::psd_sum;
  /// Matrix dimension m; for krylov, the operator dimension n.
  Index dim = 8;
  /// Number of summands n of a PSD sum or Gaussian combination.
  Index terms = 512;
  Index trials = 200;
  std::uint64_t seed = 0;
  /// Sampler label echoed in reports.
  std::string sampler = "default";

  double failure_budget = 0.05;
  /// Grid experiments pass iff violation <= pass_constant * eps at every grid point.
  double pass_constant = 1.0;
  std::vector<double> eps_grid{0.05, 0.1, 0.2, 0.4};
  /// Reference rows P(sigma_m <= eps / sqrt(m)) reported by the jointly-Gaussian run.
  std::vector<double> reference_eps{0.1, 0.3};

  // small-ball preconditions
  Index precondition_samples = 2000;
  Index precondition_directions = 16;
  Index precondition_descent = 32;

  // krylov
  Index krylov_steps = 4;
  double eig_gap = 1e-3;
  double alpha_A = 1e-6;
  double c_h = 1.0;
  /// Density h of the sketch; 0 selects the default formula.
  double h = 0.0;
  /// Multiplicity of a repeated leading eigenvalue; < 2 means all distinct.
  Index repeated = 0;

  // counterexample
  std::vector<Index> dims{8, 16, 24};
  double decay_ratio = 0.1;

  /// Throws std::invalid_argument when the parameters are incomplete for the kind.
  void validate() const;
};

/// Kind-specific defaults (krylov: n = 64, m = 4, budget 0; counterexample: 100 seeds).
EnsembleSpec default_spec(EnsembleKind kind);

void to_json(nlohmann::json& j, const EnsembleSpec& spec);
void from_json(const nlohmann::json& j, EnsembleSpec& spec);

struct GridRow {
  double eps = 0.0;
  double threshold = 0.0;
  double violation_fraction = 0.0;
  double allowed = 0.0;
  bool pass = false;
};

struct ExperimentReport {
  EnsembleSpec spec;
  /// Per-trial values compared against bound_value; sigma_min unless noted.
  std::string statistic_name = "sigma_min";
  std::vector<double> sigma_min;
  std::vector<double> sigma_max;
  std::vector<double> statistic;
  /// Sweep parameter of each trial (m for the counterexample); empty otherwise.
  std::vector<Index> group;
  std::map<std::string, double> quantiles;
  double bound_value = 0.0;
  /// #(statistic <= bound_value) / trials.
  double violation_fraction = 0.0;
  bool pass = false;
  double wall_time = 0.0;
  std::vector<GridRow> grid;
  nlohmann::json extra = nlohmann::json::object();
  std::string note;
};

double violation_fraction(const std::vector<double>& values, double bound);
/// Quantiles q0, q05, q25, q50, q75, q95, q100 (nearest rank on sorted values).
std::map<std::string, double> empirical_quantiles(std::vector<double> values);
double median(std::vector<double> values);

/// sigma_m((1/n) sum_i M_i) against alpha beta / 2. An empty sampler selects
/// the rank-one Gaussian PSD ensemble. Throws PreconditionFailed on a summand
/// with lambda_min < -1e-8 ||M_i||.
ExperimentReport run_psd_sum_experiment(const EnsembleSpec& spec, double alpha, double beta,
                                        const PsdSampler& sampler = {});

/// sigma_m(M) against eps^2 alpha^2 / (m^3 s) over the eps grid. s_bound <= 0
/// selects the empirical 7/8 quantile of sigma_1. Throws PreconditionFailed
/// when the small-ball estimate at alpha is below 1/2 or P(sigma_1 > s) > 1/8.
ExperimentReport run_jointly_gaussian_experiment(const EnsembleSpec& spec,
                                                 const JointlyGaussianEnsemble& ensemble, double alpha,
                                                 double s_bound);

/// M = M_0 + n^{-1/2} sum_i g_i M_i against eps^2 alpha^2 beta / (m^3 s).
/// beta <= 0 uses the small-ball estimate of the uniform mixture M'; a given
/// beta above that estimate fails the precondition.
ExperimentReport run_gaussian_combination_experiment(const EnsembleSpec& spec, const CMatrix& base,
                                                     const CoefficientSampler& coefficients,
                                                     MatrixTypeTag tag, double alpha, double beta,
                                                     double s_bound);

/// sigma_n(K) / sigma_1(K) against n * DBL_EPSILON (numerically singular).
ExperimentReport run_krylov_experiment(const EnsembleSpec& spec);

/// Median sigma_min over `trials` draws for every m in spec.dims, computed by
/// the exact bidiagonal inverse. Pass iff successive medians shrink by at
/// least decay_ratio.
ExperimentReport run_counterexample_experiment(const EnsembleSpec& spec);

}  // namespace bkr::xlab
