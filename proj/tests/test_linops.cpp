// Copyright (c) bkrylov contributors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

#include "bkr/csv.hpp"
#include "bkr/double_double.hpp"
#include "bkr/error.hpp"
#include "bkr/generators.hpp"
#include "bkr/kernels.hpp"
#include "bkr/matrix_market.hpp"
#include "bkr/operator.hpp"
#include "bkr/spectral.hpp"
#include "support/oracles.hpp"

using namespace bkr;

namespace {

struct ThreadGuard {
  explicit ThreadGuard(int n) { set_thread_count(n); }
  ~ThreadGuard() { set_thread_count(0); }
};

}  // namespace

TEST_SUITE("sparse matrix") {
  TEST_CASE("canonical storage invariants") {
    CounterRng rng(11);
    for (int t = 0; t < 30; ++t) {
      const Index r = oracle::uniform_index(rng, 1, 20), c = oracle::uniform_index(rng, 1, 20);
      const SparseMatrix a = oracle::random_sparse(r, c, 0.3, rng);
      const auto& off = a.row_offsets();
      REQUIRE(off.size() == r + 1);
      CHECK(off.back() == a.nnz());
      for (Index i = 0; i < r; ++i) {
        CHECK(off[i] <= off[i + 1]);
        const auto cols = a.row_cols(i);
        for (Index k = 0; k < cols.size(); ++k) {
          CHECK(cols[k] < c);
          if (k > 0) CHECK(cols[k - 1] < cols[k]);
        }
      }
      for (double v : a.values()) CHECK(v != 0.0);
    }
  }

  TEST_CASE("from_triplets sums duplicates and drops cancellations") {
    const SparseMatrix a = SparseMatrix::from_triplets(
        2, 3, {{0, 1, 2.0}, {0, 1, 3.0}, {1, 2, 1.0}, {1, 2, -1.0}, {1, 0, 0.0}, {0, 0, 4.0}});
    CHECK(a.nnz() == 2);
    CHECK(a.at(0, 1) == 5.0);
    CHECK(a.at(0, 0) == 4.0);
    CHECK(a.at(1, 2) == 0.0);
  }

  TEST_CASE("constructor rejects non-canonical input") {
    CHECK_THROWS(SparseMatrix(2, 2, {0, 1, 2}, {0, 0}, {1.0, 0.0}));
    CHECK_THROWS(SparseMatrix(2, 2, {0, 2, 2}, {1, 0}, {1.0, 2.0}));
    CHECK_THROWS(SparseMatrix(2, 2, {0, 1, 1}, {5}, {1.0}));
    CHECK_THROWS(SparseMatrix(1, 1, {0, 1}, {0}, {std::numeric_limits<double>::quiet_NaN()}));
  }

  TEST_CASE("transpose and symmetry") {
    CounterRng rng(5);
    const SparseMatrix a = oracle::random_sparse(7, 4, 0.4, rng);
    const oracle::Mat at = oracle::transpose(oracle::from_sparse(a));
    CHECK(oracle::from_sparse(a.transpose()).a == at.a);
    CHECK(oracle::random_spd(6, 0.3, 1.0, rng).is_symmetric());
    CHECK_FALSE(SparseMatrix::from_triplets(2, 2, {{0, 1, 1.0}}).is_symmetric());
  }
}

TEST_SUITE("kernels") {
  TEST_CASE("spmv basic cases") {
    const SparseMatrix z = SparseMatrix::zero(3, 5);
    const std::vector<double> x5{1, 2, 3, 4, 5};
    CHECK(spmv(z, x5) == std::vector<double>(3, 0.0));
    const std::vector<double> x{1, 2, 3};
    CHECK(spmv(SparseMatrix::identity(3), x) == x);
    CHECK_THROWS_AS(spmv(SparseMatrix::identity(3), x5), std::invalid_argument);
  }

  TEST_CASE("spmv matches dense oracle") {
    CounterRng rng(21);
    const SparseMatrix a = oracle::random_sparse(50, 50, 0.2, rng);
    const std::vector<double> x = oracle::normal_vector(50, rng);
    CHECK(oracle::rel_diff(spmv(a, x), oracle::matvec(oracle::from_sparse(a), x)) <= 1e-13);
  }

  TEST_CASE("spmv linearity") {
    CounterRng rng(22);
    for (int t = 0; t < 20; ++t) {
      const Index n = oracle::uniform_index(rng, 1, 40);
      const SparseMatrix a = oracle::random_sparse(n, n, 0.3, rng);
      const auto x = oracle::normal_vector(n, rng), y = oracle::normal_vector(n, rng);
      std::vector<double> xy(n);
      for (Index i = 0; i < n; ++i) xy[i] = x[i] + y[i];
      const auto ax = spmv(a, x), ay = spmv(a, y);
      std::vector<double> sum(n);
      for (Index i = 0; i < n; ++i) sum[i] = ax[i] + ay[i];
      CHECK(oracle::rel_diff(spmv(a, xy), sum) <= 1e-12);
    }
  }

  TEST_CASE("spmm cases") {
    CounterRng rng(23);
    const DenseBlock b = oracle::random_block(30, 4, rng);
    CHECK(spmm(SparseMatrix::identity(30), b) == b);
    const SparseMatrix a = oracle::random_sparse(30, 30, 0.2, rng);
    const DenseBlock c = spmm(a, b);
    const oracle::Mat ref = oracle::matmul(oracle::from_sparse(a), oracle::from_block(b));
    CHECK(oracle::rel_frobenius(oracle::from_block(c), ref) <= 1e-13);
    DenseBlock col(30, 1, std::vector<double>(b.col(2).begin(), b.col(2).end()));
    const auto y = spmv(a, b.col(2));
    const DenseBlock ac = spmm(a, col);
    CHECK(std::vector<double>(ac.col(0).begin(), ac.col(0).end()) == y);
    CHECK_THROWS(spmm(a, oracle::random_block(29, 2, rng)));
  }

  TEST_CASE("parallel kernels are bitwise equal to serial references") {
    ThreadGuard threads(4);
    CounterRng rng(24);
    for (int t = 0; t < 6; ++t) {
      const Index n = 500 + 700 * static_cast<Index>(t);
      const SparseMatrix a = oracle::random_sparse(n, n, 12.0 / static_cast<double>(n), rng);
      const auto x = oracle::normal_vector(n, rng);
      std::vector<double> ys(n), yp(n);
      kernels::serial::spmv(a, x, ys);
      kernels::parallel::spmv(a, x, yp);
      CHECK(ys == yp);

      const DenseBlock b = oracle::random_block(n, 3, rng);
      CHECK(kernels::serial::spmm(a, b) == kernels::parallel::spmm(a, b));

      const DenseBlock lo = oracle::random_block(n, 3, rng);
      DenseBlock hs(n, 3), ls(n, 3), hp(n, 3), lp(n, 3);
      kernels::serial::spmm_compensated(a, b, lo, hs, ls);
      kernels::parallel::spmm_compensated(a, b, lo, hp, lp);
      CHECK(hs == hp);
      CHECK(ls == lp);

      const Index r = 300;
      const DenseBlock d = oracle::random_block(n > 1500 ? 1500 : n, r, rng);
      const auto v = oracle::normal_vector(r, rng);
      std::vector<double> gs(d.rows()), gp(d.rows());
      kernels::serial::gemv(d, v, gs);
      kernels::parallel::gemv(d, v, gp);
      CHECK(gs == gp);
    }
  }

  TEST_CASE("compensated product carries the low part") {
    // (1 + 2^-60) * 3 is not representable; hi + lo keeps it.
    const SparseMatrix a = SparseMatrix::from_triplets(1, 1, {{0, 0, 3.0}});
    const DenseBlock hi(1, 1, 1.0), lo(1, 1, std::ldexp(1.0, -60));
    DenseBlock oh(1, 1), ol(1, 1);
    kernels::serial::spmm_compensated(a, hi, lo, oh, ol);
    CHECK(oh(0, 0) == 3.0);
    CHECK(ol(0, 0) == 3.0 * std::ldexp(1.0, -60));
  }

  TEST_CASE("dot and norm2") {
    const std::vector<double> x{3.0, 4.0};
    CHECK(dot(x, x) == 25.0);
    CHECK(norm2(x) == 5.0);
    const std::vector<double> big{1e200, 1e200};
    CHECK(norm2(big) == doctest::Approx(std::sqrt(2.0) * 1e200));
  }
}

TEST_SUITE("double-double") {
  TEST_CASE("error-free transforms") {
    const double a = 1.0, b = std::ldexp(1.0, -70);
    const DoubleDouble s = dd::two_sum(a, b);
    CHECK(s.hi == 1.0);
    CHECK(s.lo == b);
    const double x = 1.0 + std::ldexp(1.0, -30);
    const DoubleDouble p = dd::two_prod(x, x);
    CHECK(p.hi == 1.0 + std::ldexp(1.0, -29));
    CHECK(p.lo == std::ldexp(1.0, -60));
  }

  TEST_CASE("arithmetic keeps about 106 bits") {
    const DoubleDouble third = DoubleDouble(1.0) / DoubleDouble(3.0);
    const DoubleDouble back = third * 3.0 - DoubleDouble(1.0);
    CHECK(std::abs(back.to_double()) < 1e-30);
  }
}

TEST_SUITE("spectral") {
  TEST_CASE("identity and diagonal") {
    const SpectralSummary s = svd_summary(DenseBlock::identity(4));
    CHECK(s.singular_values == std::vector<double>{1, 1, 1, 1});
    CHECK(s.condition_number == 1.0);
    DenseBlock d(3, 3);
    d(0, 0) = 1;
    d(1, 1) = 3;
    d(2, 2) = 2;
    const SpectralSummary ds = svd_summary(d);
    CHECK(ds.singular_values[0] == doctest::Approx(3));
    CHECK(ds.singular_values[1] == doctest::Approx(2));
    CHECK(ds.singular_values[2] == doctest::Approx(1));
    CHECK(ds.sigma_min == ds.singular_values.back());
  }

  TEST_CASE("Frobenius identity and ordering") {
    CounterRng rng(31);
    const DenseBlock m = oracle::random_block(20, 20, rng);
    const SpectralSummary s = svd_summary(m);
    double sum = 0.0;
    for (Index i = 0; i < s.singular_values.size(); ++i) {
      sum += s.singular_values[i] * s.singular_values[i];
      if (i > 0) CHECK(s.singular_values[i - 1] >= s.singular_values[i]);
    }
    const double f = m.frobenius_norm();
    CHECK(std::abs(sum - f * f) <= 1e-10 * f * f);
    CHECK(s.condition_number == doctest::Approx(s.sigma_max() / s.sigma_min));
  }

  TEST_CASE("agrees with an independent eigenvalue oracle") {
    CounterRng rng(32);
    const DenseBlock m = oracle::random_block(9, 6, rng);
    const auto ref = oracle::singular_values(oracle::from_block(m));
    const auto got = svd_summary(m).singular_values;
    REQUIRE(got.size() == ref.size());
    for (Index i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(ref[i]).epsilon(1e-9));
  }

  TEST_CASE("permutation invariance") {
    CounterRng rng(33);
    for (int t = 0; t < 10; ++t) {
      const Index r = oracle::uniform_index(rng, 2, 12), c = oracle::uniform_index(rng, 2, 12);
      const DenseBlock m = oracle::random_block(r, c, rng);
      DenseBlock p(r, c);
      for (Index i = 0; i < r; ++i)
        for (Index j = 0; j < c; ++j) p(r - 1 - i, (j + 1) % c) = m(i, j);
      const auto a = svd_summary(m).singular_values, b = svd_summary(p).singular_values;
      for (Index i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-10 * a[0]);
    }
  }

  TEST_CASE("errors and floor") {
    DenseBlock bad(2, 2, 1.0);
    bad(0, 1) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(svd_summary(bad), NonFiniteError);
    CHECK_THROWS_AS(svd_summary(DenseBlock(kDenseCap + 1, 1)), CapacityError);
    DenseBlock rank1(3, 3, 1.0);
    const SpectralSummary s = svd_summary(rank1);
    CHECK(s.sigma_min < 1e-14);
    DenseBlock tiny(2, 2);
    tiny(0, 0) = 1.0;
    tiny(1, 1) = 1e-310;
    const SpectralSummary t = svd_summary(tiny);
    CHECK(t.sigma_min == 0.0);
    CHECK(std::isinf(t.condition_number));
  }

  TEST_CASE("complex input") {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(3, 3) * std::complex<double>(0.0, 2.0);
    const SpectralSummary s = svd_summary(m);
    for (double v : s.singular_values) CHECK(v == doctest::Approx(2.0));
  }

  TEST_CASE("partial determinant") {
    CounterRng rng(34);
    CHECK(partial_determinant(oracle::random_block(4, 3, rng), 0) == 1.0);
    for (Index k = 0; k <= 5; ++k) CHECK(partial_determinant(DenseBlock::identity(5), k) == doctest::Approx(1.0));
    CHECK_THROWS(partial_determinant(DenseBlock::identity(3), 4));
    for (Index n = 2; n <= 8; ++n) {
      const DenseBlock m = oracle::random_block(n, n, rng);
      const double det = oracle::lu_abs_det(oracle::from_block(m));
      CHECK(std::abs(partial_determinant(m, n) - det) <= 1e-9 * det);
      const auto sv = svd_summary(m).singular_values;
      for (Index k = 0; k < n; ++k) CHECK(partial_determinant(m, k + 1) == partial_determinant(m, k) * sv[k]);
      // nonincreasing in k exactly when the next singular value is at most one
      for (Index k = 0; k < n; ++k)
        CHECK((partial_determinant(m, k + 1) <= partial_determinant(m, k)) == (sv[k] <= 1.0));
    }
  }
}

TEST_SUITE("operators") {
  TEST_CASE("sparse operator ignores delta and is deterministic") {
    CounterRng rng(41);
    const SparseMatrix a = oracle::random_spd(12, 0.3, 1.0, rng);
    const OperatorPtr op = make_operator(a);
    CHECK(op->is_symmetric());
    const auto x = oracle::normal_vector(12, rng);
    std::vector<double> y1(12), y2(12);
    op->apply(x, y1, 0.0);
    op->apply(x, y2, 1e-3);
    CHECK(y1 == y2);
    CHECK(op->apply(x) == y1);
  }

  TEST_CASE("padded operator has an identity tail") {
    const OperatorPtr op = make_operator(SparseMatrix::from_triplets(2, 2, {{0, 0, 2.0}, {1, 1, 3.0}, {0, 1, 1.0}, {1, 0, 1.0}}));
    const PaddedOperator p(op, 4);
    const std::vector<double> x{1, 1, 5, 7};
    const auto y = p.apply(x);
    CHECK(y == std::vector<double>{3, 4, 5, 7});
    CHECK_THROWS(PaddedOperator(op, 1));
    CHECK(round_up_to_multiple(10, 4) == 12);
    CHECK(round_up_to_multiple(12, 4) == 12);
  }
}

TEST_SUITE("io") {
  TEST_CASE("matrix market round trip") {
    CounterRng rng(51);
    const SparseMatrix g = oracle::random_sparse(6, 4, 0.5, rng);
    std::stringstream ss;
    mm::write(ss, g);
    CHECK(mm::read(ss) == g);
    const SparseMatrix s = oracle::random_spd(7, 0.3, 1.0, rng);
    std::stringstream ss2;
    mm::write(ss2, s, mm::Symmetry::symmetric);
    CHECK(mm::read(ss2) == s);
  }

  TEST_CASE("matrix market variants") {
    std::stringstream sym("%%MatrixMarket matrix coordinate real symmetric\n% comment\n3 3 3\n1 1 2\n2 1 -1\n3 3 4\n");
    const SparseMatrix a = mm::read(sym);
    CHECK(a.at(0, 1) == -1.0);
    CHECK(a.at(1, 0) == -1.0);
    CHECK(a.nnz() == 4);
    std::stringstream pat("%%MatrixMarket matrix coordinate pattern general\n2 2 2\n1 2\n2 1\n");
    CHECK(mm::read(pat).at(0, 1) == 1.0);
    std::stringstream integer("%%MatrixMarket matrix coordinate integer general\n1 1 1\n1 1 7\n");
    CHECK(mm::read(integer).at(0, 0) == 7.0);
  }

  TEST_CASE("matrix market errors") {
    const char* bad[] = {
        "garbage\n",
        "%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n",
        "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n",
        "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n",
        "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 abc\n",
        "%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n",
    };
    for (const char* text : bad) {
      std::stringstream in(text);
      CHECK_THROWS_AS(mm::read(in), ParseError);
    }
    CHECK_THROWS_AS(mm::read(std::filesystem::path("/nonexistent/file.mtx")), ParseError);
  }

  TEST_CASE("csv and vector round trip at full precision") {
    CounterRng rng(52);
    const DenseBlock m = oracle::random_block(3, 5, rng);
    std::stringstream ss;
    io::write_csv(ss, m);
    CHECK(io::read_csv(ss) == m);
    const auto dir = std::filesystem::temp_directory_path() / "bkr_test_io";
    std::filesystem::create_directories(dir);
    const auto v = oracle::normal_vector(9, rng);
    io::write_vector(dir / "v.txt", v);
    CHECK(io::read_vector(dir / "v.txt") == v);
    CHECK(io::format_double(0.1) == "0.10000000000000001");
  }
}

TEST_SUITE("generators") {
  TEST_CASE("random sparse SPD spectrum endpoints") {
    for (double cond : {10.0, 1e4}) {
      const SparseMatrix a = gen::random_sparse_spd(40, cond, 0.1, 3);
      CHECK(a.is_symmetric());
      const auto ev = oracle::jacobi_eigenvalues(oracle::from_sparse(a));
      CHECK(ev.front() == doctest::Approx(1.0 / cond).epsilon(1e-8));
      CHECK(ev.back() == doctest::Approx(1.0).epsilon(1e-10));
    }
  }

  TEST_CASE("rotated diagonal keeps the spectrum") {
    const std::vector<double> eigs = gen::separated_spectrum(10, 0.01, 4);
    for (Index i = 1; i < eigs.size(); ++i) CHECK(std::abs(eigs[i] - eigs[i - 1]) >= 0.01 - 1e-15);
    const SparseMatrix a = gen::rotated_diagonal(eigs, 5);
    CHECK(a.is_symmetric());
    auto ev = oracle::jacobi_eigenvalues(oracle::from_sparse(a));
    auto sorted = eigs;
    std::sort(sorted.begin(), sorted.end());
    for (Index i = 0; i < ev.size(); ++i) CHECK(ev[i] == doctest::Approx(sorted[i]).epsilon(1e-10));
  }

  TEST_CASE("seeded generators are reproducible") {
    CHECK(gen::gaussian_vector(20, 9) == gen::gaussian_vector(20, 9));
    CHECK(gen::gaussian_vector(20, 9) != gen::gaussian_vector(20, 10));
    CHECK(gen::random_sparse_spd(15, 100, 0.2, 1) == gen::random_sparse_spd(15, 100, 0.2, 1));
  }
}
