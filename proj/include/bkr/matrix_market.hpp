// Copyright (c) bkrylov contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <iosfwd>

#include "bkr/sparse_matrix.hpp"

namespace bkr::mm {

enum class Symmetry { general, symmetric };

/// Reads `%%MatrixMarket matrix coordinate {real|integer|pattern} {general|symmetric}`.
/// Symmetric files are expanded to both triangles. Throws ParseError.
SparseMatrix read(std::istream& in);
SparseMatrix read(const std::filesystem::path& path);

/// Symmetric output stores the lower triangle only and requires a symmetric matrix.
void write(std::ostream& out, const SparseMatrix& a, Symmetry symmetry = Symmetry::general);
void write(const std::filesystem::path& path, const SparseMatrix& a,
           Symmetry symmetry = Symmetry::general);

}  // namespace bkr::mm
