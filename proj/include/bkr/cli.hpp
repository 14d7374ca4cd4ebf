// Copyright (c) bkrylov contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "bkr/dense_block.hpp"

namespace bkr::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitContract = 3;

/// Runs one invocation; args excludes the program name. Never returns
/// anything but 0, 2 or 3.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

struct BenchRow {
  Index m = 0;
  Index s = 0;
  double fast_matvec_time = 0.0;   // seconds per product, median over repetitions
  double dense_matvec_time = 0.0;
  double solve_time = 0.0;
  double max_rel_diff = 0.0;       // fast vs dense product, deterministic for a seed
};

/// Times the FFT and dense Hankel products and one structured solve on the
/// Gram matrix of a diagonal operator of size m s.
BenchRow bench_hankel(Index m, Index s, Index repetitions, std::uint64_t seed);
/// Every size of the grid, timed interleaved within each repetition.
std::vector<BenchRow> bench_hankel_grid(const std::vector<Index>& ms, Index s, Index repetitions,
                                        std::uint64_t seed);

/// Header m,s,fast_matvec_time,dense_matvec_time,solve_time,fast_dense_ratio,max_rel_diff.
void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows);

/// "8,16,24" -> {8, 16, 24}; empty items are skipped.
std::vector<Index> parse_index_list(const std::string& text);

}  // namespace bkr::cli
