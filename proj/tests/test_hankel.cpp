// Copyright (c) bkrylov contributors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "bkr/error.hpp"
#include "bkr/generators.hpp"
#include "bkr/hankel.hpp"
#include "bkr/sketch.hpp"
#include "support/oracles.hpp"

using namespace bkr;

namespace {

// Random symmetric blocks: a valid Hankel symbol, not necessarily PSD.
BlockHankelMatrix random_symbol(Index s, Index m, CounterRng& rng) {
  BlockHankelMatrix h;
  h.s = s;
  h.m = m;
  for (Index k = 0; k + 1 < 2 * m; ++k) {
    DenseBlock b = oracle::random_block(s, s, rng);
    for (Index i = 0; i < s; ++i)
      for (Index j = 0; j < i; ++j) b(j, i) = b(i, j);
    h.blocks.push_back(std::move(b));
  }
  return h;
}

// Gram matrix of a Krylov instance over A with |eigenvalues| spread over [lo, 1]
// and alternating signs, which keeps K well conditioned.
BlockHankelMatrix krylov_gram(Index s, Index m, double lo, CounterRng& rng) {
  const Index n = s * m;
  std::vector<double> ev(n);
  for (Index i = 0; i < n; ++i)
    ev[i] = (i % 2 ? -1.0 : 1.0) * (lo + (1.0 - lo) * double(i) / double(std::max<Index>(n - 1, 1)));
  const SparseMatrix a = gen::rotated_diagonal(ev, rng.next_u64());
  const SparseMatrix g = sample_sparse_gaussian({n, s, double(n), rng.next_u64()});
  return assemble_block_hankel(build_krylov(make_operator(a), g, m));
}

oracle::Mat dense_of(const BlockHankelMatrix& h) {
  oracle::Mat d(h.dimension(), h.dimension());
  for (Index bi = 0; bi < h.m; ++bi)
    for (Index bj = 0; bj < h.m; ++bj)
      for (Index i = 0; i < h.s; ++i)
        for (Index j = 0; j < h.s; ++j) d(bi * h.s + i, bj * h.s + j) = h.blocks[bi + bj](i, j);
  return d;
}

double condition(const oracle::Mat& d) {
  const auto ev = oracle::jacobi_eigenvalues(d);
  return ev.back() / ev.front();
}

}  // namespace

TEST_SUITE("fast hankel matvec") {
  TEST_CASE("agrees with the dense expansion") {
    CounterRng rng(101);
    for (int t = 0; t < 100; ++t) {
      const Index s = oracle::uniform_index(rng, 1, 8), m = oracle::uniform_index(rng, 1, 16);
      const BlockHankelMatrix h = random_symbol(s, m, rng);
      const FastHankelOperator op(h);
      const auto v = oracle::normal_vector(s * m, rng);
      const auto ref = oracle::matvec(dense_of(h), v);
      CHECK(oracle::rel_diff(fast_hankel_matvec(op, v), ref) <= 1e-10);
      CHECK(oracle::rel_diff(DenseHankelOperator(h).apply(v), ref) <= 1e-13);
    }
  }

  TEST_CASE("psd instance m=8 s=4") {
    CounterRng rng(102);
    const BlockHankelMatrix h = krylov_gram(4, 8, 0.5, rng);
    const auto v = oracle::normal_vector(32, rng);
    CHECK(oracle::rel_diff(FastHankelOperator(h).apply(v), oracle::matvec(dense_of(h), v)) <= 1e-10);
  }

  TEST_CASE("zero vector and single block") {
    CounterRng rng(103);
    const BlockHankelMatrix h = random_symbol(3, 5, rng);
    const FastHankelOperator op(h);
    const auto z = op.apply(std::vector<double>(15, 0.0));
    for (double v : z) CHECK(v == 0.0);

    const BlockHankelMatrix one = random_symbol(4, 1, rng);
    const auto v = oracle::normal_vector(4, rng);
    CHECK(oracle::rel_diff(FastHankelOperator(one).apply(v), oracle::matvec(oracle::from_block(one.blocks[0]), v)) <=
          1e-14);
  }

  TEST_CASE("fft length and errors") {
    CounterRng rng(104);
    for (Index m : {1, 2, 3, 8, 9}) {
      const FastHankelOperator op(random_symbol(2, m, rng));
      CHECK(op.fft_length() >= 2 * m);
      CHECK((op.fft_length() & (op.fft_length() - 1)) == 0);
    }
    const FastHankelOperator op(random_symbol(2, 3, rng));
    CHECK_THROWS_AS(op.apply(std::vector<double>(5, 1.0)), DimensionError);
    BlockHankelMatrix bad = random_symbol(2, 3, rng);
    bad.blocks.pop_back();
    CHECK_THROWS_AS(FastHankelOperator{bad}, DimensionError);
  }
}

TEST_SUITE("hankel solve") {
  TEST_CASE("scaled identity operator") {
    // A = a I gives H = a^2 ... a^{2m} scaled copies of G^T G; with s = n and m = 1 it is nonsingular.
    const double a = 0.7;
    const SparseMatrix g = sample_sparse_gaussian({6, 6, 6.0, 9});
    std::vector<Triplet> t;
    for (Index i = 0; i < 6; ++i) t.push_back({i, i, a});
    const BlockHankelMatrix h =
        assemble_block_hankel(build_krylov(make_operator(SparseMatrix::from_triplets(6, 6, t)), g, 1));
    CounterRng rng(105);
    const auto rhs = oracle::normal_vector(6, rng);
    HankelSolveConfig cfg;
    const HankelSolveResult r = solve_hankel(h, rhs, cfg);
    CHECK(r.achieved_residual <= cfg.tol);
    CHECK(oracle::norm(oracle::matvec(dense_of(h), r.y)) > 0.0);
  }

  TEST_CASE("manufactured solution") {
    CounterRng rng(106);
    int checked = 0;
    for (int t = 0; t < 20; ++t) {
      const Index s = oracle::uniform_index(rng, 1, 4), m = oracle::uniform_index(rng, 1, 3);
      const BlockHankelMatrix h = krylov_gram(s, m, 0.3, rng);
      const oracle::Mat d = dense_of(h);
      if (condition(d) > 1e8) continue;
      ++checked;
      const auto ystar = oracle::normal_vector(s * m, rng);
      const auto rhs = oracle::matvec(d, ystar);
      for (HankelMode mode : {HankelMode::structured_cg, HankelMode::dense_ldl, HankelMode::automatic}) {
        HankelSolveConfig cfg;
        cfg.mode = mode;
        const HankelSolveResult r = solve_hankel(h, rhs, cfg);
        CHECK(oracle::rel_diff(r.y, ystar) <= 1e-6);
      }
    }
    CHECK(checked >= 10);
  }

  TEST_CASE("structured cg matches dense ldl") {
    CounterRng rng(107);
    const BlockHankelMatrix h = krylov_gram(3, 4, 0.5, rng);
    const auto rhs = oracle::normal_vector(12, rng);
    HankelSolveConfig cg, ldl;
    cg.mode = HankelMode::structured_cg;
    cg.max_iters = 2000;
    ldl.mode = HankelMode::dense_ldl;
    const auto ycg = solve_hankel(h, rhs, cg);
    const auto yldl = solve_hankel(h, rhs, ldl);
    CHECK(ycg.mode_used == HankelMode::structured_cg);
    CHECK(yldl.mode_used == HankelMode::dense_ldl);
    CHECK(oracle::rel_diff(ycg.y, yldl.y) <= 1e-7);
  }

  TEST_CASE("achieved residual is recomputed") {
    CounterRng rng(108);
    for (int t = 0; t < 10; ++t) {
      const BlockHankelMatrix h = krylov_gram(2, 3, 0.4, rng);
      const auto rhs = oracle::normal_vector(6, rng);
      HankelSolveConfig cfg;
      cfg.tol = 1e-9;
      const HankelSolveResult r = solve_hankel(h, rhs, cfg);
      auto hy = oracle::matvec(dense_of(h), r.y);
      for (Index i = 0; i < hy.size(); ++i) hy[i] -= rhs[i];
      const double truth = oracle::norm(hy) / oracle::norm(rhs);
      CHECK(r.achieved_residual <= cfg.tol);
      // the oracle uses the rounded blocks only, so allow their rounding
      CHECK(std::abs(r.achieved_residual - truth) <= 1e-12 * condition(dense_of(h)) + 1e-3 * truth);
    }
  }

  TEST_CASE("error in the H norm does not grow") {
    CounterRng rng(109);
    const Index s = 3, m = 4;
    const BlockHankelMatrix h = krylov_gram(s, m, 0.6, rng);
    const oracle::Mat d = dense_of(h);
    const auto ystar = oracle::normal_vector(s * m, rng);
    const auto rhs = oracle::matvec(d, ystar);
    std::vector<double> energy;
    HankelSolveConfig cfg;
    cfg.mode = HankelMode::structured_cg;
    cfg.tol = 1e-12;
    cfg.observer = [&](Index, std::span<const double> y) {
      std::vector<double> e(y.begin(), y.end());
      for (Index i = 0; i < e.size(); ++i) e[i] -= ystar[i];
      const auto he = oracle::matvec(d, e);
      double v = 0;
      for (Index i = 0; i < e.size(); ++i) v += e[i] * he[i];
      energy.push_back(v);
    };
    const HankelSolveResult r = solve_hankel(h, rhs, cfg);
    REQUIRE(energy.size() == r.iters);
    for (Index i = s; i < energy.size(); i += s) CHECK(energy[i] <= 1.1 * energy[i - s] + 1e-24);
    REQUIRE(!r.residual_history.empty());
  }

  TEST_CASE("zero rhs and failures") {
    CounterRng rng(110);
    const BlockHankelMatrix h = krylov_gram(2, 2, 0.5, rng);
    const HankelSolveResult z = solve_hankel(h, std::vector<double>(4, 0.0), {});
    for (double v : z.y) CHECK(v == 0.0);
    CHECK_THROWS_AS(solve_hankel(h, std::vector<double>(3, 1.0), {}), DimensionError);
    CHECK_THROWS_AS(solve_hankel(h, std::vector<double>{1.0, NAN, 0.0, 0.0}, {}), NonFiniteError);

    // Zero matrix: nothing converges, the best attempt is carried.
    BlockHankelMatrix zero = h;
    for (auto& b : zero.blocks) b = DenseBlock(2, 2);
    zero.tails.clear();
    HankelSolveConfig cfg;
    cfg.regularization = 0.0;
    try {
      (void)HankelSolver(zero, cfg).solve(std::vector<double>{1.0, 0.0, 0.0, 0.0});
      FAIL("expected IllConditionedSystem");
    } catch (const IllConditionedSystem& e) {
      CHECK(e.best().y.size() == 4);
      CHECK(e.best().achieved_residual >= 1.0 - 1e-12);
    } catch (const std::exception& e) {
      FAIL("unexpected exception: " << e.what());
    }
  }

  TEST_CASE("reused solver on many right-hand sides") {
    CounterRng rng(111);
    const HankelSolver solver(krylov_gram(2, 3, 0.5, rng), {});
    for (int t = 0; t < 5; ++t) {
      const auto rhs = oracle::normal_vector(6, rng);
      CHECK(solver.solve(rhs).achieved_residual <= solver.config().tol);
    }
  }
}

TEST_SUITE("hankel config") {
  TEST_CASE("validation and tolerance floor") {
    HankelSolveConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.tol = 1e-20;
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.effective_tol() == kMinHankelTol);
    cfg.tol = 1.0;
    CHECK_THROWS(cfg.validate());
    cfg.tol = 1e-8;
    cfg.max_iters = 0;
    CHECK_THROWS(cfg.validate());
    cfg.max_iters = 3;
    cfg.regularization = -1;
    CHECK_THROWS(cfg.validate());
  }

  TEST_CASE("json round trip and mode names") {
    HankelSolveConfig cfg;
    cfg.tol = 1e-9;
    cfg.max_iters = 77;
    cfg.mode = HankelMode::dense_ldl;
    cfg.regularization = 1e-12;
    nlohmann::json j = cfg;
    const HankelSolveConfig back = j.get<HankelSolveConfig>();
    CHECK(back.tol == cfg.tol);
    CHECK(back.max_iters == 77);
    CHECK(back.mode == HankelMode::dense_ldl);
    CHECK(back.regularization == 1e-12);
    for (HankelMode m : {HankelMode::structured_cg, HankelMode::dense_ldl, HankelMode::automatic})
      CHECK(hankel_mode_from_string(to_string(m)) == m);
    CHECK(to_string(HankelMode::automatic) == "auto");
    CHECK_THROWS(hankel_mode_from_string("lu"));
  }
}
