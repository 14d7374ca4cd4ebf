// Copyright (c) bkrylov contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "bkr/dense_block.hpp"

namespace bkr::io {

/// Shortest round-trip text for a double ("%.17g").
std::string format_double(double v);

/// One matrix row per line, comma separated, full precision.
void write_csv(std::ostream& out, const DenseBlock& m);
void write_csv(const std::filesystem::path& path, const DenseBlock& m);
DenseBlock read_csv(std::istream& in);
DenseBlock read_csv(const std::filesystem::path& path);

/// One value per line; blank lines and '#' comments are skipped on read.
void write_vector(const std::filesystem::path& path, const std::vector<double>& v);
std::vector<double> read_vector(const std::filesystem::path& path);

}  // namespace bkr::io
