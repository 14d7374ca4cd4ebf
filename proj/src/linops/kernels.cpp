// Copyright (c) bkrylov contributors
// SPDX-License-Identifier: Apache-2.0
#include "bkr/kernels.hpp"

#include <cmath>

#include <omp.h>

#include "bkr/double_double.hpp"
#include "bkr/error.hpp"

namespace bkr::kernels {
namespace {

constexpr Index kParallelWork = 1 << 14;

inline double row_dot(const SparseMatrix& a, Index i, const double* x) noexcept {
  const Index* cols = a.col_indices().data();
  const double* vals = a.values().data();
  double sum = 0.0;
  for (Index p = a.row_offsets()[i]; p < a.row_offsets()[i + 1]; ++p) sum += vals[p] * x[cols[p]];
  return sum;
}

inline DoubleDouble row_dot_compensated(const SparseMatrix& a, Index i, const double* hi,
                                        const double* lo) noexcept {
  const Index* cols = a.col_indices().data();
  const double* vals = a.values().data();
  DoubleDouble sum;
  for (Index p = a.row_offsets()[i]; p < a.row_offsets()[i + 1]; ++p) {
    const Index c = cols[p];
    sum += DoubleDouble(hi[c], lo[c]) * vals[p];
  }
  return sum;
}

void check_spmv(const SparseMatrix& a, std::span<const double> x, std::span<double> y) {
  require_dims(x.size() == a.cols(), "spmv: x length must equal A.cols");
  require_dims(y.size() == a.rows(), "spmv: y length must equal A.rows");
}

void check_spmm(const SparseMatrix& a, const DenseBlock& b) {
  require_dims(b.rows() == a.cols(), "spmm: B.rows must equal A.cols");
}

void check_compensated(const SparseMatrix& a, const DenseBlock& hi, const DenseBlock& lo) {
  check_spmm(a, hi);
  require_dims(hi.rows() == lo.rows() && hi.cols() == lo.cols(), "spmm_compensated: hi/lo shape mismatch");
}

void check_gemv(const DenseBlock& a, std::span<const double> x, std::span<double> y) {
  require_dims(x.size() == a.cols() && y.size() == a.rows(), "gemv: dimension mismatch");
}

}  // namespace

namespace serial {

void spmv(const SparseMatrix& a, std::span<const double> x, std::span<double> y) {
  check_spmv(a, x, y);
  for (Index i = 0; i < a.rows(); ++i) y[i] = row_dot(a, i, x.data());
}

DenseBlock spmm(const SparseMatrix& a, const DenseBlock& b) {
  check_spmm(a, b);
  DenseBlock out(a.rows(), b.cols());
  for (Index j = 0; j < b.cols(); ++j) {
    const double* x = b.col(j).data();
    double* y = out.col(j).data();
    for (Index i = 0; i < a.rows(); ++i) y[i] = row_dot(a, i, x);
  }
  return out;
}

void spmm_compensated(const SparseMatrix& a, const DenseBlock& hi, const DenseBlock& lo,
                      DenseBlock& out_hi, DenseBlock& out_lo) {
  check_compensated(a, hi, lo);
  out_hi = DenseBlock(a.rows(), hi.cols());
  out_lo = DenseBlock(a.rows(), hi.cols());
  for (Index j = 0; j < hi.cols(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) {
      const DoubleDouble v = row_dot_compensated(a, i, hi.col(j).data(), lo.col(j).data());
      out_hi(i, j) = v.hi;
      out_lo(i, j) = v.lo;
    }
  }
}

void gemv(const DenseBlock& a, std::span<const double> x, std::span<double> y) {
  check_gemv(a, x, y);
  for (Index i = 0; i < a.rows(); ++i) y[i] = 0.0;
  for (Index j = 0; j < a.cols(); ++j) {
    const double* col = a.col(j).data();
    const double xj = x[j];
    for (Index i = 0; i < a.rows(); ++i) y[i] += col[i] * xj;
  }
}

}  // namespace serial

namespace parallel {

void spmv(const SparseMatrix& a, std::span<const double> x, std::span<double> y) {
  check_spmv(a, x, y);
  const auto rows = static_cast<std::int64_t>(a.rows());
#pragma omp parallel for schedule(static) if (a.nnz() > kParallelWork)
  for (std::int64_t i = 0; i < rows; ++i) y[i] = row_dot(a, static_cast<Index>(i), x.data());
}

DenseBlock spmm(const SparseMatrix& a, const DenseBlock& b) {
  check_spmm(a, b);
  DenseBlock out(a.rows(), b.cols());
  const auto rows = static_cast<std::int64_t>(a.rows());
  const Index cols = b.cols();
#pragma omp parallel for schedule(static) if (a.nnz() * cols > kParallelWork)
  for (std::int64_t i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) out(i, j) = row_dot(a, static_cast<Index>(i), b.col(j).data());
  }
  return out;
}

void spmm_compensated(const SparseMatrix& a, const DenseBlock& hi, const DenseBlock& lo,
                      DenseBlock& out_hi, DenseBlock& out_lo) {
  check_compensated(a, hi, lo);
  out_hi = DenseBlock(a.rows(), hi.cols());
  out_lo = DenseBlock(a.rows(), hi.cols());
  const auto rows = static_cast<std::int64_t>(a.rows());
  const Index cols = hi.cols();
#pragma omp parallel for schedule(static) if (a.nnz() * cols > kParallelWork / 8)
  for (std::int64_t ii = 0; ii < rows; ++ii) {
    const auto i = static_cast<Index>(ii);
    for (Index j = 0; j < cols; ++j) {
      const DoubleDouble v = row_dot_compensated(a, i, hi.col(j).data(), lo.col(j).data());
      out_hi(i, j) = v.hi;
      out_lo(i, j) = v.lo;
    }
  }
}

void gemv(const DenseBlock& a, std::span<const double> x, std::span<double> y) {
  check_gemv(a, x, y);
  const auto rows = static_cast<std::int64_t>(a.rows());
  const Index cols = a.cols();
  constexpr std::int64_t kChunk = 256;
  const std::int64_t chunks = (rows + kChunk - 1) / kChunk;
#pragma omp parallel for schedule(static) if (a.size() > kParallelWork)
  for (std::int64_t c = 0; c < chunks; ++c) {
    const std::int64_t begin = c * kChunk;
    const std::int64_t end = std::min(rows, begin + kChunk);
    for (std::int64_t i = begin; i < end; ++i) y[i] = 0.0;
    for (Index j = 0; j < cols; ++j) {
      const double* col = a.col(j).data();
      const double xj = x[j];
      for (std::int64_t i = begin; i < end; ++i) y[i] += col[i] * xj;
    }
  }
}

}  // namespace parallel
}  // namespace bkr::kernels

namespace bkr {

std::vector<double> spmv(const SparseMatrix& a, std::span<const double> x) {
  std::vector<double> y(a.rows());
  kernels::parallel::spmv(a, x, y);
  return y;
}

DenseBlock spmm(const SparseMatrix& a, const DenseBlock& b) { return kernels::parallel::spmm(a, b); }

double dot(std::span<const double> x, std::span<const double> y) noexcept {
  double sum = 0.0;
  for (Index i = 0; i < x.size(); ++i) sum += x[i] * y[i];
  return sum;
}

double norm2(std::span<const double> x) noexcept {
  double scale = 0.0;
  for (double v : x) scale = std::max(scale, std::abs(v));
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  double sum = 0.0;
  for (double v : x) sum += (v / scale) * (v / scale);
  return scale * std::sqrt(sum);
}

void set_thread_count(int threads) {
  if (threads > 0) {
    omp_set_num_threads(threads);
  } else {
    omp_set_num_threads(omp_get_num_procs());
  }
}

}  // namespace bkr
