// Copyright (c) bkrylov contributors
// SPDX-License-Identifier: Apache-2.0
#include "bkr/sketch.hpp"

#include <cmath>

#include "bkr/error.hpp"
#include "bkr/rng.hpp"

namespace bkr {

void SketchSpec::validate() const {
  require(n >= 1, "SketchSpec: n must be positive");
  require(s >= 1, "SketchSpec: s must be positive");
  require(std::isfinite(h) && h > 0.0, "SketchSpec: h must be positive");
  require(h <= static_cast<double>(n), "SketchSpec: h must not exceed n");
}

void to_json(nlohmann::json& j, const SketchSpec& spec) {
  j = nlohmann::json{{"n", spec.n}, {"s", spec.s}, {"h", spec.h}, {"seed", spec.seed}};
}

void from_json(const nlohmann::json& j, SketchSpec& spec) {
  try {
    j.at("n").get_to(spec.n);
    j.at("s").get_to(spec.s);
    j.at("h").get_to(spec.h);
    spec.seed = j.value("seed", std::uint64_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("sketch spec: ") + e.what());
  }
}

SparseMatrix sample_sparse_gaussian_columns(const SketchSpec& spec, Index first, Index last) {
  spec.validate();
  require(first <= last && last <= spec.s, "sample_sparse_gaussian_columns: bad column range");
  const double p = spec.density();
  std::vector<Triplet> entries;
  entries.reserve(static_cast<Index>(p * static_cast<double>(spec.n * (last - first))) + 16);
  for (Index j = first; j < last; ++j) {
    CounterRng rng = SeedPath(spec.seed, {j}).rng();
    for (Index i = 0; i < spec.n; ++i) {
      if (rng.uniform() < p) entries.push_back({i, j - first, rng.normal()});
    }
  }
  return SparseMatrix::from_triplets(spec.n, last - first, std::move(entries));
}

SparseMatrix sample_sparse_gaussian(const SketchSpec& spec) {
  return sample_sparse_gaussian_columns(spec, 0, spec.s);
}

SketchShape default_sketch_width_and_density(Index n, Index m, double alpha, double c_h) {
  require(n >= 1 && m >= 1, "default_sketch_width_and_density: n and m must be positive");
  require(alpha > 0.0 && alpha < 1.0, "default_sketch_width_and_density: alpha must lie in (0, 1)");
  require(c_h > 0.0, "default_sketch_width_and_density: c_h must be positive");
  require_dims(n % m == 0, "default_sketch_width_and_density: m must divide n (pad first)");
  const double nd = static_cast<double>(n);
  const double raw = std::ceil(c_h * static_cast<double>(m) * std::log(nd) * std::log(1.0 / alpha));
  return {n / m, std::max(1.0, std::min(nd, raw))};
}

SparseMatrix pad_to_multiple(const SparseMatrix& a, Index m) {
  require(m > 0, "pad_to_multiple: m must be positive");
  require_dims(a.rows() == a.cols(), "pad_to_multiple: matrix must be square");
  const Index n = a.rows();
  const Index padded = (n + m - 1) / m * m;
  if (padded == n) return a;
  std::vector<Index> offsets = a.row_offsets();
  std::vector<Index> cols = a.col_indices();
  std::vector<double> vals = a.values();
  for (Index i = n; i < padded; ++i) {
    cols.push_back(i);
    vals.push_back(1.0);
    offsets.push_back(vals.size());
  }
  return SparseMatrix(padded, padded, std::move(offsets), std::move(cols), std::move(vals));
}

}  // namespace bkr
