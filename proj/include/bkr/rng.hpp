// Copyright (c) bkrylov contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <vector>

namespace bkr {

/// Philox4x32-10 counter-based generator.
///
/// The stream is a pure function of (key, counter): block c of output is
/// philox(key, c). Satisfies UniformRandomBitGenerator for 32-bit results.
class CounterRng {
 public:
  using result_type = std::uint32_t;

  explicit CounterRng(std::uint64_t key, std::uint64_t stream = 0) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;
  std::uint64_t next_u64() noexcept;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Standard normal by Box-Muller from two uniform draws (cosine branch).
  double normal() noexcept;
  /// Uniform integer on [0, bound).
  std::uint64_t below(std::uint64_t bound) noexcept;

  /// Discards the rest of the current block and jumps to block `block`.
  void seek(std::uint64_t block) noexcept;

  static std::array<std::uint32_t, 4> philox(std::array<std::uint32_t, 2> key,
                                             std::array<std::uint32_t, 4> counter) noexcept;

 private:
  void refill() noexcept;

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> counter_;
  std::array<std::uint32_t, 4> buffer_{};
  unsigned position_ = 4;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Hierarchical seed (root, i0, i1, ...). Distinct paths hash to distinct
/// Philox keys; the same path always reproduces the same stream, so results
/// do not depend on traversal order or thread count.
class SeedPath {
 public:
  explicit SeedPath(std::uint64_t root) noexcept : root_(root) {}
  SeedPath(std::uint64_t root, std::initializer_list<std::uint64_t> path);

  SeedPath child(std::uint64_t index) const;
  std::uint64_t key() const noexcept;
  CounterRng rng() const noexcept { return CounterRng(key()); }

  std::uint64_t root() const noexcept { return root_; }
  const std::vector<std::uint64_t>& path() const noexcept { return path_; }

 private:
  std::uint64_t root_;
  std::vector<std::uint64_t> path_;
};

}  // namespace bkr
