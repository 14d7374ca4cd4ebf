// Copyright (c) bkrylov contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include <nlohmann/json.hpp>

#include "bkr/sparse_matrix.hpp"

namespace bkr {

/// n x s sketch whose entries are N(0,1) with probability h/n and 0 otherwise.
struct SketchSpec {
  Index n = 0;
  Index s = 0;
  double h = 0.0;
  std::uint64_t seed = 0;

  double density() const noexcept { return h / static_cast<double>(n); }
  /// Throws std::invalid_argument unless 0 < h <= n and s >= 1.
  void validate() const;
};

void to_json(nlohmann::json& j, const SketchSpec& spec);
void from_json(const nlohmann::json& j, SketchSpec& spec);

/// Column j is drawn from SeedPath(seed, {j}): rows in order, one uniform for
/// the keep decision and, when kept, one normal (two uniforms).
SparseMatrix sample_sparse_gaussian(const SketchSpec& spec);

/// Columns [first, last) of the same matrix, as an n x (last - first) block.
SparseMatrix sample_sparse_gaussian_columns(const SketchSpec& spec, Index first, Index last);

struct SketchShape {
  Index s;
  double h;
};

/// s = n/m and h = min(n, ceil(c_h m ln n ln(1/alpha))), at least 1.
/// Throws DimensionError when m does not divide n.
SketchShape default_sketch_width_and_density(Index n, Index m, double alpha, double c_h);

/// A in the leading block, identity on the appended diagonal, size rounded
/// up to a multiple of m. Returns A unchanged when m already divides n.
SparseMatrix pad_to_multiple(const SparseMatrix& a, Index m);

}  // namespace bkr
