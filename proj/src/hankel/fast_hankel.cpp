// Copyright (c) bkrylov contributors
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <bit>
#include <memory>
#include <mutex>
#include <new>

#include <fftw3.h>

#include "bkr/double_double.hpp"
#include "bkr/error.hpp"
#include "bkr/hankel.hpp"
#include "bkr/kernels.hpp"

namespace bkr {
namespace {

// The FFTW planner is not thread safe; execution of an existing plan is.
std::mutex& planner_mutex() {
  static std::mutex mutex;
  return mutex;
}

struct RealPlan {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

RealPlan make_plans(Index length, Index howmany) {
  std::lock_guard lock(planner_mutex());
  const int n = static_cast<int>(length);
  const int freq = n / 2 + 1;
  double* real = fftw_alloc_real(length * howmany);
  fftw_complex* spec = fftw_alloc_complex(static_cast<Index>(freq) * howmany);
  // Execution arrays come from fftw_alloc_* to match the planned alignment.
  const unsigned flags = FFTW_ESTIMATE;
  RealPlan p;
  p.forward = fftw_plan_many_dft_r2c(1, &n, static_cast<int>(howmany), real, nullptr, 1, n, spec, nullptr, 1,
                                     freq, flags);
  p.backward = fftw_plan_many_dft_c2r(1, &n, static_cast<int>(howmany), spec, nullptr, 1, freq, real, nullptr,
                                      1, n, flags | FFTW_DESTROY_INPUT);
  fftw_free(real);
  fftw_free(spec);
  if (!p.forward || !p.backward) throw std::runtime_error("FastHankelOperator: FFT planning failed");
  return p;
}

void destroy_plans(RealPlan& p) {
  std::lock_guard lock(planner_mutex());
  if (p.forward) fftw_destroy_plan(p.forward);
  if (p.backward) fftw_destroy_plan(p.backward);
  p = {};
}

struct FftwFree {
  void operator()(void* p) const noexcept { fftw_free(p); }
};
using RealBuffer = std::unique_ptr<double[], FftwFree>;
using ComplexBuffer = std::unique_ptr<fftw_complex[], FftwFree>;

RealBuffer real_buffer(Index n) {
  RealBuffer b(fftw_alloc_real(n));
  if (!b) throw std::bad_alloc();
  std::fill_n(b.get(), n, 0.0);
  return b;
}

ComplexBuffer complex_buffer(Index n) {
  ComplexBuffer b(fftw_alloc_complex(n));
  if (!b) throw std::bad_alloc();
  return b;
}

void check_hankel(const BlockHankelMatrix& h) {
  require(h.s >= 1 && h.m >= 1, "BlockHankelMatrix: s and m must be positive");
  require_dims(h.blocks.size() == 2 * h.m - 1, "BlockHankelMatrix: expected 2m-1 blocks");
  require_dims(h.tails.empty() || h.tails.size() == h.blocks.size(), "BlockHankelMatrix: tails/blocks mismatch");
  for (const auto& b : h.blocks) require_dims(b.rows() == h.s && b.cols() == h.s, "BlockHankelMatrix: blocks must be s x s");
}

}  // namespace

struct FastHankelOperator::Plans {
  RealPlan vector_plans;
  ~Plans() { destroy_plans(vector_plans); }
};

FastHankelOperator::FastHankelOperator(const BlockHankelMatrix& h) : s_(h.s), m_(h.m) {
  check_hankel(h);
  length_ = std::bit_ceil(2 * m_);
  const Index freq = length_ / 2 + 1;
  const Index ss = s_ * s_;

  // Transform every (a, b) entry sequence of the symbol once.
  RealPlan symbol_plan = make_plans(length_, ss);
  RealBuffer seq = real_buffer(length_ * ss);
  for (Index t = 0; t < h.blocks.size(); ++t)
    for (Index b = 0; b < s_; ++b)
      for (Index a = 0; a < s_; ++a) seq[(a * s_ + b) * length_ + t] = h.blocks[t](a, b);
  ComplexBuffer spec = complex_buffer(freq * ss);
  fftw_execute_dft_r2c(symbol_plan.forward, seq.get(), spec.get());
  destroy_plans(symbol_plan);

  symbol_.resize(freq * ss);
  for (Index e = 0; e < ss; ++e)
    for (Index f = 0; f < freq; ++f) symbol_[f * ss + e] = {spec[e * freq + f][0], spec[e * freq + f][1]};

  plans_ = std::make_unique<Plans>();
  plans_->vector_plans = make_plans(length_, s_);
}

FastHankelOperator::~FastHankelOperator() = default;

void FastHankelOperator::apply(std::span<const double> v, std::span<double> out) const {
  const Index dim = dimension();
  require_dims(v.size() == dim && out.size() == dim, "fast_hankel_matvec: vector length must be m * s");
  const Index freq = length_ / 2 + 1;
  const Index s = s_;

  // Reversed block order turns sum_k B[i+k] v_k into the convolution (B * u)[i + m - 1].
  RealBuffer seq = real_buffer(length_ * s);
  for (Index k = 0; k < m_; ++k)
    for (Index b = 0; b < s; ++b) seq[b * length_ + k] = v[(m_ - 1 - k) * s + b];
  ComplexBuffer u = complex_buffer(freq * s);
  fftw_execute_dft_r2c(plans_->vector_plans.forward, seq.get(), u.get());

  ComplexBuffer y = complex_buffer(freq * s);
  const auto nfreq = static_cast<std::int64_t>(freq);
  const fftw_complex* uu = u.get();
  fftw_complex* yy = y.get();
  const double* sym = reinterpret_cast<const double*>(symbol_.data());
#pragma omp parallel for schedule(static) if (freq * s * s > 8192)
  for (std::int64_t ff = 0; ff < nfreq; ++ff) {
    const auto f = static_cast<Index>(ff);
    const double* c = sym + 2 * f * s * s;
    for (Index a = 0; a < s; ++a) {
      double re = 0.0, im = 0.0;
      for (Index b = 0; b < s; ++b) {
        const double cr = c[2 * (a * s + b)], ci = c[2 * (a * s + b) + 1];
        const double ur = uu[b * freq + f][0], ui = uu[b * freq + f][1];
        re += cr * ur - ci * ui;
        im += cr * ui + ci * ur;
      }
      yy[a * freq + f][0] = re;
      yy[a * freq + f][1] = im;
    }
  }

  fftw_execute_dft_c2r(plans_->vector_plans.backward, y.get(), seq.get());
  const double scale = 1.0 / static_cast<double>(length_);
  for (Index i = 0; i < m_; ++i)
    for (Index a = 0; a < s; ++a) out[i * s + a] = seq[a * length_ + i + m_ - 1] * scale;
}

std::vector<double> FastHankelOperator::apply(std::span<const double> v) const {
  std::vector<double> out(dimension());
  apply(v, out);
  return out;
}

std::vector<double> fast_hankel_matvec(const FastHankelOperator& op, std::span<const double> v) {
  return op.apply(v);
}

DenseHankelOperator::DenseHankelOperator(const BlockHankelMatrix& h) {
  check_hankel(h);
  dense_ = h.expand();
}

void DenseHankelOperator::apply(std::span<const double> v, std::span<double> out) const {
  kernels::parallel::gemv(dense_, v, out);
}

std::vector<double> DenseHankelOperator::apply(std::span<const double> v) const {
  require_dims(v.size() == dimension(), "DenseHankelOperator: vector length mismatch");
  std::vector<double> out(dimension());
  apply(v, out);
  return out;
}

double hankel_residual_norm(const BlockHankelMatrix& h, std::span<const double> y,
                            std::span<const double> rhs) {
  check_hankel(h);
  const Index s = h.s;
  const Index dim = h.dimension();
  require_dims(y.size() == dim && rhs.size() == dim, "hankel_residual_norm: length mismatch");
  const bool has_tails = !h.tails.empty();
  std::vector<double> r(dim);
  const auto rows = static_cast<std::int64_t>(dim);
#pragma omp parallel for schedule(static) if (dim * dim > 65536)
  for (std::int64_t rr = 0; rr < rows; ++rr) {
    const auto row = static_cast<Index>(rr);
    const Index bi = row / s;
    const Index a = row % s;
    DoubleDouble acc(-rhs[row]);
    for (Index bj = 0; bj < h.m; ++bj) {
      const DenseBlock& hi = h.blocks[bi + bj];
      for (Index b = 0; b < s; ++b) {
        const DoubleDouble entry(hi(a, b), has_tails ? h.tails[bi + bj](a, b) : 0.0);
        acc += entry * y[bj * s + b];
      }
    }
    r[row] = acc.to_double();
  }
  return norm2(r);
}

}  // namespace bkr
