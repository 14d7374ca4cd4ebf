// Copyright (c) bkrylov contributors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <sstream>

#include "bkr/error.hpp"
#include "bkr/xlab/ensembles.hpp"
#include "bkr/xlab/experiments.hpp"
#include "bkr/xlab/report.hpp"
#include "bkr/xlab/small_ball.hpp"
#include "support/oracles.hpp"

using namespace bkr;
using namespace bkr::xlab;

namespace {

// P(|N(0,1)| <= t) without the library helpers.
double normal_abs_cdf(double t) { return std::erf(t / std::sqrt(2.0)); }

void check_violation_recomputes(const ExperimentReport& r) {
  Index count = 0;
  for (double v : r.statistic) count += v <= r.bound_value ? 1 : 0;
  CHECK(r.violation_fraction == double(count) / double(r.statistic.size()));
  CHECK(r.statistic.size() == r.spec.trials * (r.group.empty() ? 1 : r.spec.dims.size()));
}

EnsembleSpec small_spec(EnsembleKind kind) {
  EnsembleSpec s = default_spec(kind);
  s.seed = 17;
  return s;
}

}  // namespace

TEST_SUITE("small ball") {
  TEST_CASE("zero sampler never exceeds") {
    for (double alpha : {0.0, 0.5, 3.0}) {
      SmallBallConfig cfg;
      cfg.alpha = alpha;
      cfg.n_samples = 200;
      cfg.n_directions = 4;
      const SmallBallEstimate e = estimate_small_ball(zero_sampler(3), cfg);
      CHECK(e.beta_hat == 0.0);
    }
  }

  TEST_CASE("gaussian tail at alpha one") {
    SmallBallConfig cfg;
    cfg.alpha = 1.0;
    cfg.seed = 3;
    const SmallBallEstimate e = estimate_small_ball(gaussian_sampler(8), cfg);
    const double truth = 1.0 - normal_abs_cdf(1.0);
    CHECK(std::abs(e.beta_hat - truth) <= 0.03);
    CHECK(e.n_matrix_samples == 10000);
    CHECK(e.n_directions == 32);
    // every visited pair sees the same law
    for (double p : e.pair_probabilities) CHECK(std::abs(p - truth) <= 0.03);
  }

  TEST_CASE("alpha zero with a nonsingular sampler") {
    SmallBallConfig cfg;
    cfg.alpha = 0.0;
    cfg.n_samples = 2000;
    const SmallBallEstimate e = estimate_small_ball(gaussian_sampler(5), cfg);
    CHECK(e.beta_hat >= 0.99);
  }

  TEST_CASE("nonincreasing in alpha") {
    const std::vector<double> alphas{0.0, 0.1, 0.3, 0.7, 1.0, 1.5, 2.5};
    for (MatrixTypeTag tag :
         {MatrixTypeTag::real, MatrixTypeTag::complex, MatrixTypeTag::real_symmetric, MatrixTypeTag::self_adjoint}) {
      SmallBallConfig cfg;
      cfg.tag = tag;
      cfg.n_samples = 1000;
      cfg.n_directions = 8;
      cfg.descent_steps = 16;
      cfg.seed = 9;
      const MatrixSampler sampler = real_pairs(tag) ? symmetric_gaussian_sampler(4) : hermitian_gaussian_sampler(4);
      const auto curve = estimate_small_ball_curve(sampler, alphas, cfg);
      for (Index i = 1; i < curve.size(); ++i) CHECK(curve[i].beta_hat <= curve[i - 1].beta_hat);
      for (Index i = 0; i < alphas.size(); ++i) {
        cfg.alpha = alphas[i];
        CHECK(estimate_small_ball(sampler, cfg).beta_hat == curve[i].beta_hat);
      }
    }
  }

  TEST_CASE("worst pair respects the type") {
    CounterRng seeds(5);
    for (int t = 0; t < 8; ++t) {
      for (MatrixTypeTag tag :
           {MatrixTypeTag::real, MatrixTypeTag::complex, MatrixTypeTag::real_symmetric, MatrixTypeTag::self_adjoint}) {
        SmallBallConfig cfg;
        cfg.tag = tag;
        cfg.alpha = 0.5;
        cfg.n_samples = 300;
        cfg.n_directions = 6;
        cfg.descent_steps = 10;
        cfg.seed = seeds.next_u64();
        const SmallBallEstimate e = estimate_small_ball(complex_gaussian_sampler(3), cfg);
        CHECK(std::abs(e.worst_x.norm() - 1.0) <= 1e-12);
        CHECK(std::abs(e.worst_y.norm() - 1.0) <= 1e-12);
        if (diagonal_pairs(tag)) CHECK(e.worst_x == e.worst_y);
        if (real_pairs(tag)) {
          CHECK(e.worst_x.imag().cwiseAbs().maxCoeff() == 0.0);
          CHECK(e.worst_y.imag().cwiseAbs().maxCoeff() == 0.0);
        }
        CHECK(e.beta_hat >= 0.0);
        CHECK(e.beta_hat <= 1.0);
        CHECK(e.beta_hat == *std::min_element(e.pair_probabilities.begin(), e.pair_probabilities.end()));
      }
    }
  }

  TEST_CASE("random unit vectors") {
    CounterRng rng(6);
    for (int t = 0; t < 200; ++t) {
      const Index m = oracle::uniform_index(rng, 1, 20);
      const CVector c = random_unit_vector(m, false, rng);
      CHECK(std::abs(c.norm() - 1.0) <= 1e-12);
      const CVector r = random_unit_vector(m, true, rng);
      CHECK(std::abs(r.norm() - 1.0) <= 1e-12);
      CHECK(r.imag().cwiseAbs().maxCoeff() == 0.0);
    }
  }

  TEST_CASE("counterexample defeats the bound") {
    // e_1^T M e_1 = 0 identically for m >= 3
    SmallBallConfig cfg;
    cfg.alpha = 0.5;
    cfg.tag = MatrixTypeTag::real_symmetric;
    cfg.n_samples = 500;
    const SmallBallEstimate e = estimate_small_ball(counterexample_ensemble(4).sampler(), cfg);
    CHECK(e.beta_hat < 0.5);
  }

  TEST_CASE("tag names and json") {
    for (MatrixTypeTag tag :
         {MatrixTypeTag::real, MatrixTypeTag::complex, MatrixTypeTag::real_symmetric, MatrixTypeTag::self_adjoint})
      CHECK(matrix_type_from_string(to_string(tag)) == tag);
    CHECK(to_string(MatrixTypeTag::real_symmetric) == "real-symmetric");
    CHECK_THROWS(matrix_type_from_string("hermitian"));
    SmallBallConfig cfg;
    cfg.n_samples = 100;
    cfg.n_directions = 3;
    cfg.descent_steps = 2;
    const nlohmann::json j = to_json(estimate_small_ball(gaussian_sampler(2), cfg));
    CHECK(j.contains("beta_hat"));
    CHECK(j.at("n_directions") == 3);
  }
}

TEST_SUITE("ensembles") {
  TEST_CASE("tail helpers") {
    CHECK(gaussian_two_sided_tail(1.0) == doctest::Approx(0.3173105).epsilon(1e-6));
    CHECK(chi_square_1_tail(0.1) == doctest::Approx(0.7518296).epsilon(1e-6));
    CHECK(gaussian_two_sided_tail(0.0) == 1.0);
  }

  TEST_CASE("counterexample structure") {
    const DenseBlock two = counterexample_matrix(2, 0.75);
    CHECK(two(0, 0) == 0.0);
    CHECK(two(0, 1) == 0.75);
    CHECK(two(1, 0) == 0.75);
    CHECK(two(1, 1) == 2.0);
    for (Index m : {3, 5, 8, 13}) {
      const DenseBlock c = counterexample_matrix(m, std::uint64_t(m));
      CHECK(c == c.transpose());
      const double g = counterexample_draw(m);
      for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < m; ++j) {
          const Index k = i + j + 2;  // 1-based index sum
          const double expect = k == m + 1 ? g : (k == m + 2 ? double(m) : 0.0);
          CHECK(c(i, j) == expect);
        }
    }
  }

  TEST_CASE("exact sigma_min matches an eigenvalue oracle") {
    for (Index m = 2; m <= 10; ++m)
      for (double g : {1.0, 2.5, -3.0, 10.0, 40.0}) {
        const DenseBlock c = counterexample_matrix(m, g);
        const auto ev = oracle::jacobi_eigenvalues(oracle::from_block(c));
        double smallest = INFINITY;
        for (double v : ev) smallest = std::min(smallest, std::abs(v));
        CHECK(std::abs(counterexample_sigma_min(m, g) - smallest) <= 1e-12 * c.frobenius_norm());
      }
  }

  TEST_CASE("iid ensemble entries") {
    const JointlyGaussianEnsemble e = iid_gaussian_ensemble(3);
    CHECK(e.coefficients.size() == 9);
    CHECK(e.base.isZero());
    CounterRng rng(7);
    std::vector<double> all;
    for (int t = 0; t < 2000; ++t) {
      const Eigen::MatrixXd s = e.sample(rng);
      for (Eigen::Index i = 0; i < s.size(); ++i) all.push_back(s.data()[i]);
    }
    double mean = 0, var = 0;
    for (double v : all) mean += v;
    mean /= all.size();
    for (double v : all) var += (v - mean) * (v - mean);
    var /= all.size();
    CHECK(std::abs(mean) <= 5.0 / std::sqrt(double(all.size())));
    CHECK(std::abs(var - 1.0) <= 5.0 * std::sqrt(2.0 / double(all.size())));
  }

  TEST_CASE("symmetric and hermitian samplers") {
    CounterRng rng(8);
    const CMatrix s = symmetric_gaussian_sampler(5)(rng);
    CHECK(s == s.transpose());
    CHECK(s.imag().isZero());
    const CMatrix h = hermitian_gaussian_sampler(5)(rng);
    CHECK(h == h.adjoint());
    CHECK(zero_sampler(4)(rng).isZero());
  }
}

TEST_SUITE("psd sum experiment") {
  TEST_CASE("deterministic identity summand") {
    EnsembleSpec spec = small_spec(EnsembleKind::psd_sum);
    spec.dim = 3;
    spec.terms = 1;
    spec.trials = 20;
    const ExperimentReport r = run_psd_sum_experiment(spec, 0.5, 1.0, fixed_psd(Eigen::MatrixXd::Identity(3, 3)));
    CHECK(r.bound_value == 0.25);
    CHECK(r.violation_fraction == 0.0);
    CHECK(r.pass);
    for (double v : r.sigma_min) CHECK(v == doctest::Approx(1.0));
    check_violation_recomputes(r);
  }

  TEST_CASE("rank deficient negative control") {
    EnsembleSpec spec = small_spec(EnsembleKind::psd_sum);
    spec.dim = 2;
    spec.terms = 4;
    spec.trials = 10;
    Eigen::MatrixXd e1 = Eigen::MatrixXd::Zero(2, 2);
    e1(0, 0) = 1.0;
    const ExperimentReport r = run_psd_sum_experiment(spec, 0.1, chi_square_1_tail(0.1), fixed_psd(e1));
    CHECK(r.violation_fraction == 1.0);
    CHECK_FALSE(r.pass);
    check_violation_recomputes(r);
  }

  TEST_CASE("rank one gaussian ensemble") {
    EnsembleSpec spec = small_spec(EnsembleKind::psd_sum);
    spec.trials = 40;
    const ExperimentReport r = run_psd_sum_experiment(spec, 0.1, chi_square_1_tail(0.1));
    CHECK(r.bound_value == doctest::Approx(0.05 * chi_square_1_tail(0.1)));
    CHECK(r.pass);
    CHECK(r.quantiles.count("q50") == 1);
    check_violation_recomputes(r);
  }

  TEST_CASE("non psd summand is rejected") {
    EnsembleSpec spec = small_spec(EnsembleKind::psd_sum);
    spec.dim = 2;
    spec.terms = 2;
    spec.trials = 2;
    CHECK_THROWS_AS(run_psd_sum_experiment(spec, 0.1, 0.5, fixed_psd(-Eigen::MatrixXd::Identity(2, 2))),
                    PreconditionFailed);
  }
}

TEST_SUITE("jointly gaussian experiment") {
  TEST_CASE("zero threshold has no violations") {
    EnsembleSpec spec = small_spec(EnsembleKind::jointly_gaussian);
    spec.dim = 4;
    spec.trials = 100;
    spec.eps_grid = {0.0, 0.2};
    const ExperimentReport r = run_jointly_gaussian_experiment(spec, iid_gaussian_ensemble(4), 0.5, 0.0);
    REQUIRE(r.grid.size() == 2);
    CHECK(r.grid[0].threshold == 0.0);
    CHECK(r.grid[0].violation_fraction == 0.0);
    check_violation_recomputes(r);
  }

  TEST_CASE("reference rows against the classical bound") {
    EnsembleSpec spec = small_spec(EnsembleKind::jointly_gaussian);
    spec.dim = 6;
    spec.trials = 600;
    const ExperimentReport r = run_jointly_gaussian_experiment(spec, iid_gaussian_ensemble(6), 0.5, 0.0);
    for (const auto& row : r.extra.at("reference")) {
      const double eps = row.at("eps").get<double>();
      CHECK(row.at("fraction").get<double>() <= eps + 0.05);
      CHECK(row.at("fraction").get<double>() ==
            violation_fraction(r.sigma_min, eps / std::sqrt(6.0)));
    }
    CHECK(r.pass);
  }

  TEST_CASE("counterexample ensemble fails the precondition") {
    EnsembleSpec spec = small_spec(EnsembleKind::jointly_gaussian);
    spec.dim = 4;
    spec.trials = 10;
    CHECK_THROWS_AS(run_jointly_gaussian_experiment(spec, counterexample_ensemble(4), 0.5, 0.0), PreconditionFailed);
  }

  TEST_CASE("given s bound is certified") {
    EnsembleSpec spec = small_spec(EnsembleKind::jointly_gaussian);
    spec.dim = 4;
    spec.trials = 100;
    // far below sigma_1 of every draw
    CHECK_THROWS_AS(run_jointly_gaussian_experiment(spec, iid_gaussian_ensemble(4), 0.5, 1e-3), PreconditionFailed);
    const ExperimentReport r = run_jointly_gaussian_experiment(spec, iid_gaussian_ensemble(4), 0.5, 100.0);
    CHECK(r.extra.at("s_bound").get<double>() == 100.0);
  }
}

TEST_SUITE("gaussian combination experiment") {
  TEST_CASE("scalar reduction") {
    EnsembleSpec spec = small_spec(EnsembleKind::gaussian_combination);
    spec.dim = 3;
    spec.terms = 1;
    spec.trials = 2000;
    const CMatrix base = CMatrix::Zero(3, 3);
    const ExperimentReport r = run_gaussian_combination_experiment(
        spec, base, fixed_coefficients({CMatrix::Identity(3, 3)}), MatrixTypeTag::real_symmetric, 0.5, 0.0, 0.0);
    for (Index t = 0; t < spec.trials; ++t) CHECK(r.sigma_min[t] == doctest::Approx(r.sigma_max[t]));
    for (double t : {0.1, 0.5, 1.0, 2.0}) {
      const double emp = violation_fraction(r.sigma_min, t);
      CHECK(std::abs(emp - normal_abs_cdf(t)) <= 0.04);
    }
    check_violation_recomputes(r);
  }

  TEST_CASE("large shift concentrates sigma_min") {
    EnsembleSpec spec = small_spec(EnsembleKind::gaussian_combination);
    spec.trials = 50;
    spec.eps_grid = {0.1, 0.5, 1.0};
    const CMatrix base = 1000.0 * CMatrix::Identity(8, 8);
    const ExperimentReport r = run_gaussian_combination_experiment(spec, base, gaussian_coefficients(8),
                                                                 MatrixTypeTag::real, 0.5, 0.0, 0.0);
    for (const GridRow& row : r.grid) CHECK(row.violation_fraction == 0.0);
    for (double v : r.sigma_min) CHECK(std::abs(v - 1000.0) <= 50.0);
  }

  TEST_CASE("dense gaussian coefficients pass") {
    EnsembleSpec spec = small_spec(EnsembleKind::gaussian_combination);
    spec.trials = 100;
    const ExperimentReport r = run_gaussian_combination_experiment(spec, CMatrix::Zero(8, 8), gaussian_coefficients(8),
                                                                 MatrixTypeTag::real, 0.5, 0.0, 0.0);
    CHECK(r.pass);
    const double beta = r.extra.at("beta").get<double>();
    CHECK(beta > 0.5);
    CHECK_THROWS_AS(run_gaussian_combination_experiment(spec, CMatrix::Zero(8, 8), gaussian_coefficients(8),
                                                        MatrixTypeTag::real, 0.5, 0.99, 0.0),
                    PreconditionFailed);
  }
}

TEST_SUITE("krylov experiment") {
  TEST_CASE("single step is a square gaussian") {
    EnsembleSpec spec = small_spec(EnsembleKind::krylov);
    spec.dim = 16;
    spec.krylov_steps = 1;
    spec.h = 16;
    spec.trials = 100;
    const ExperimentReport r = run_krylov_experiment(spec);
    CHECK(r.extra.at("singular_fraction").get<double>() == 0.0);
    CHECK(r.bound_value == 16 * DBL_EPSILON);
    CHECK(r.pass);
    check_violation_recomputes(r);
  }

  TEST_CASE("repeated eigenvalue is always singular") {
    EnsembleSpec spec = small_spec(EnsembleKind::krylov);
    spec.dim = 16;
    spec.krylov_steps = 4;
    spec.trials = 20;
    spec.repeated = 5;  // multiplicity s + 1
    const ExperimentReport r = run_krylov_experiment(spec);
    CHECK(r.violation_fraction == 1.0);
    CHECK_FALSE(r.pass);
    check_violation_recomputes(r);
  }

  TEST_CASE("statistic is the inverse condition number") {
    EnsembleSpec spec = small_spec(EnsembleKind::krylov);
    spec.dim = 16;
    spec.trials = 10;
    const ExperimentReport r = run_krylov_experiment(spec);
    for (Index t = 0; t < spec.trials; ++t) CHECK(r.statistic[t] == r.sigma_min[t] / r.sigma_max[t]);
  }
}

TEST_SUITE("counterexample experiment") {
  TEST_CASE("geometric decay across m") {
    EnsembleSpec spec = small_spec(EnsembleKind::counterexample);
    const ExperimentReport r = run_counterexample_experiment(spec);
    const auto& decay = r.extra.at("decay");
    REQUIRE(decay.size() == 3);
    CHECK(r.pass);
    for (Index d = 1; d < decay.size(); ++d) CHECK(decay[d].at("ratio").get<double>() <= 0.1);
    check_violation_recomputes(r);
    // medians recompute from the per-trial list
    for (Index d = 0; d < decay.size(); ++d) {
      std::vector<double> slice;
      for (Index t = 0; t < r.group.size(); ++t)
        if (r.group[t] == spec.dims[d]) slice.push_back(r.sigma_min[t]);
      CHECK(median(slice) == decay[d].at("median_sigma_min").get<double>());
    }
  }
}

TEST_SUITE("reports") {
  TEST_CASE("summary helpers") {
    CHECK(violation_fraction({1, 2, 3, 4}, 2.0) == 0.5);
    CHECK(median({3, 1, 2}) == 2.0);
    const auto q = empirical_quantiles({5, 1, 4, 2, 3});
    CHECK(q.at("q00") == 1.0);
    CHECK(q.at("q100") == 5.0);
    CHECK(q.at("q50") == 3.0);
  }

  TEST_CASE("json and csv") {
    EnsembleSpec spec = small_spec(EnsembleKind::psd_sum);
    spec.dim = 2;
    spec.terms = 8;
    spec.trials = 5;
    const ExperimentReport r = run_psd_sum_experiment(spec, 0.1, 0.5);
    const nlohmann::json j = to_json(r);
    CHECK(j.at("schema") == kExperimentSchema);
    CHECK(j.at("violation_fraction").get<double>() == r.violation_fraction);
    CHECK(j.at("trials").at("sigma_min").size() == 5);
    std::ostringstream csv;
    write_trials_csv(csv, r);
    const std::string text = csv.str();
    CHECK(text.rfind("trial,group,sigma_min,sigma_max,statistic,violated\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 6);
  }

  TEST_CASE("spec json round trip and validation") {
    for (EnsembleKind k : {EnsembleKind::psd_sum, EnsembleKind::jointly_gaussian, EnsembleKind::gaussian_combination,
                           EnsembleKind::krylov, EnsembleKind::counterexample}) {
      const EnsembleSpec s = default_spec(k);
      CHECK(ensemble_kind_from_string(to_string(k)) == k);
      CHECK_NOTHROW(s.validate());
      const EnsembleSpec back = nlohmann::json(s).get<EnsembleSpec>();
      CHECK(nlohmann::json(back) == nlohmann::json(s));
    }
    EnsembleSpec bad = default_spec(EnsembleKind::psd_sum);
    bad.trials = 0;
    CHECK_THROWS(bad.validate());
    bad = default_spec(EnsembleKind::krylov);
    bad.dim = 63;
    CHECK_THROWS(bad.validate());
    CHECK_THROWS(ensemble_kind_from_string("small-ball"));
  }
}
