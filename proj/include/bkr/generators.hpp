// Copyright (c) bkrylov contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "bkr/sparse_matrix.hpp"

namespace bkr::gen {

/// Random sparse symmetric positive definite matrix with spectrum in
/// [1/cond, 1]: a random symmetric pattern of the given off-diagonal density,
/// affinely mapped so its extreme eigenvalues land on the endpoints exactly.
SparseMatrix random_sparse_spd(Index n, double cond, double density, std::uint64_t seed);

/// Q diag(eigenvalues) Q^T with Q a random orthogonal matrix (dense storage).
SparseMatrix rotated_diagonal(const std::vector<double>& eigenvalues, std::uint64_t seed);

/// Distinct eigenvalues in (0, 1], adjacent gaps at least `min_gap`.
std::vector<double> separated_spectrum(Index n, double min_gap, std::uint64_t seed);

std::vector<double> gaussian_vector(Index n, std::uint64_t seed);

}  // namespace bkr::gen
