// Copyright (c) bkrylov contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Data-parallel inner loops. Every kernel has a serial reference and an
// OpenMP variant; both fix the summation order of each output entry, so the
// two produce bitwise-identical results for any thread count.

#include <span>
#include <vector>

#include "bkr/dense_block.hpp"
#include "bkr/sparse_matrix.hpp"

namespace bkr::kernels {

namespace serial {
void spmv(const SparseMatrix& a, std::span<const double> x, std::span<double> y);
DenseBlock spmm(const SparseMatrix& a, const DenseBlock& b);
/// (out_hi + out_lo) = A * (hi + lo) in double-double.
void spmm_compensated(const SparseMatrix& a, const DenseBlock& hi, const DenseBlock& lo,
                      DenseBlock& out_hi, DenseBlock& out_lo);
void gemv(const DenseBlock& a, std::span<const double> x, std::span<double> y);
}  // namespace serial

namespace parallel {
void spmv(const SparseMatrix& a, std::span<const double> x, std::span<double> y);
DenseBlock spmm(const SparseMatrix& a, const DenseBlock& b);
void spmm_compensated(const SparseMatrix& a, const DenseBlock& hi, const DenseBlock& lo,
                      DenseBlock& out_hi, DenseBlock& out_lo);
void gemv(const DenseBlock& a, std::span<const double> x, std::span<double> y);
}  // namespace parallel

}  // namespace bkr::kernels

namespace bkr {

std::vector<double> spmv(const SparseMatrix& a, std::span<const double> x);
DenseBlock spmm(const SparseMatrix& a, const DenseBlock& b);

double dot(std::span<const double> x, std::span<const double> y) noexcept;
double norm2(std::span<const double> x) noexcept;

/// Caps OpenMP workers; 0 restores the runtime default.
void set_thread_count(int threads);

}  // namespace bkr
