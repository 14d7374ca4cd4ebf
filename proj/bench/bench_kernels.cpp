// Copyright (c) bkrylov contributors
// SPDX-License-Identifier: Apache-2.0
#include <map>

#include <benchmark/benchmark.h>

#include "bkr/generators.hpp"
#include "bkr/hankel.hpp"
#include "bkr/kernels.hpp"
#include "bkr/krylov.hpp"
#include "bkr/rng.hpp"
#include "bkr/sketch.hpp"

namespace {

using bkr::Index;

const bkr::SparseMatrix& sample_matrix(Index n) {
  static std::map<Index, bkr::SparseMatrix> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    std::vector<bkr::Triplet> t;
    bkr::CounterRng rng(n);
    for (Index i = 0; i < n; ++i) {
      t.push_back({i, i, 4.0});
      for (int k = 0; k < 8; ++k) {
        const Index j = rng.below(n);
        if (j != i) {
          t.push_back({i, j, -0.1});
          t.push_back({j, i, -0.1});
        }
      }
    }
    it = cache.emplace(n, bkr::SparseMatrix::from_triplets(n, n, std::move(t))).first;
  }
  return it->second;
}

template <bool Parallel>
void BM_Spmv(benchmark::State& state) {
  const Index n = static_cast<Index>(state.range(0));
  const auto& a = sample_matrix(n);
  const std::vector<double> x = bkr::gen::gaussian_vector(n, 1);
  std::vector<double> y(n);
  for (auto _ : state) {
    if constexpr (Parallel) {
      bkr::kernels::parallel::spmv(a, x, y);
    } else {
      bkr::kernels::serial::spmv(a, x, y);
    }
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(a.nnz()));
}

template <bool Parallel>
void BM_Spmm(benchmark::State& state) {
  const Index n = static_cast<Index>(state.range(0));
  const auto& a = sample_matrix(n);
  bkr::DenseBlock b(n, 8, bkr::gen::gaussian_vector(n * 8, 2));
  for (auto _ : state) {
    bkr::DenseBlock c = Parallel ? bkr::kernels::parallel::spmm(a, b) : bkr::kernels::serial::spmm(a, b);
    benchmark::DoNotOptimize(c.data());
  }
}

template <bool Parallel>
void BM_Gemv(benchmark::State& state) {
  const Index n = static_cast<Index>(state.range(0));
  bkr::DenseBlock a(n, n, bkr::gen::gaussian_vector(n * n, 3));
  const std::vector<double> x = bkr::gen::gaussian_vector(n, 4);
  std::vector<double> y(n);
  for (auto _ : state) {
    if constexpr (Parallel) {
      bkr::kernels::parallel::gemv(a, x, y);
    } else {
      bkr::kernels::serial::gemv(a, x, y);
    }
    benchmark::DoNotOptimize(y.data());
  }
}

bkr::BlockHankelMatrix sample_hankel(Index m, Index s) {
  const Index n = m * s;
  std::vector<bkr::Triplet> t;
  for (Index i = 0; i < n; ++i) t.push_back({i, i, 0.5 + 0.5 * static_cast<double>(i) / static_cast<double>(n)});
  auto a = bkr::make_operator(bkr::SparseMatrix::from_triplets(n, n, std::move(t)));
  const bkr::SketchSpec spec{n, s, static_cast<double>(std::min<Index>(n, 64)), 7};
  return bkr::assemble_block_hankel(bkr::build_krylov(a, bkr::sample_sparse_gaussian(spec), m));
}

template <bool Fast>
void BM_HankelMatvec(benchmark::State& state) {
  const Index m = static_cast<Index>(state.range(0));
  const Index s = 8;
  const auto h = sample_hankel(m, s);
  const std::vector<double> v = bkr::gen::gaussian_vector(m * s, 5);
  std::vector<double> y(m * s);
  if constexpr (Fast) {
    const bkr::FastHankelOperator op(h);
    for (auto _ : state) {
      op.apply(v, y);
      benchmark::DoNotOptimize(y.data());
    }
  } else {
    const bkr::DenseHankelOperator op(h);
    for (auto _ : state) {
      op.apply(v, y);
      benchmark::DoNotOptimize(y.data());
    }
  }
}

}  // namespace

BENCHMARK(BM_Spmv<false>)->Arg(1 << 12)->Arg(1 << 16);
BENCHMARK(BM_Spmv<true>)->Arg(1 << 12)->Arg(1 << 16);
BENCHMARK(BM_Spmm<false>)->Arg(1 << 12)->Arg(1 << 16);
BENCHMARK(BM_Spmm<true>)->Arg(1 << 12)->Arg(1 << 16);
BENCHMARK(BM_Gemv<false>)->Arg(512)->Arg(2048);
BENCHMARK(BM_Gemv<true>)->Arg(512)->Arg(2048);
BENCHMARK(BM_HankelMatvec<true>)->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(BM_HankelMatvec<false>)->Arg(64)->Arg(128)->Arg(256);

BENCHMARK_MAIN();
