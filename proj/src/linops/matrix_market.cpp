// Copyright (c) bkrylov contributors
// SPDX-License-Identifier: Apache-2.0
#include "bkr/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <string>

#include "bkr/csv.hpp"
#include "bkr/error.hpp"

namespace bkr::mm {
namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

SparseMatrix read(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("Matrix Market: empty input");
  std::istringstream banner(line);
  std::string tag, object, format, field, symmetry;
  banner >> tag >> object >> format >> field >> symmetry;
  if (tag != "%%MatrixMarket") throw ParseError("Matrix Market: missing %%MatrixMarket banner");
  object = lower(object);
  format = lower(format);
  field = lower(field);
  symmetry = lower(symmetry);
  if (object != "matrix" || format != "coordinate")
    throw ParseError("Matrix Market: only 'matrix coordinate' is supported");
  const bool pattern = field == "pattern";
  if (!pattern && field != "real" && field != "integer" && field != "double")
    throw ParseError("Matrix Market: unsupported field '" + field + "'");
  const bool symmetric = symmetry == "symmetric";
  if (!symmetric && symmetry != "general")
    throw ParseError("Matrix Market: unsupported symmetry '" + symmetry + "'");

  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first != std::string::npos && line[first] != '%') break;
  }
  long long rows = -1, cols = -1, entries = -1;
  {
    std::istringstream size_line(line);
    if (!(size_line >> rows >> cols >> entries) || rows < 0 || cols < 0 || entries < 0)
      throw ParseError("Matrix Market: malformed size line");
  }
  if (symmetric && rows != cols) throw ParseError("Matrix Market: symmetric matrix must be square");

  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<Index>(symmetric ? 2 * entries : entries));
  for (long long k = 0; k < entries; ++k) {
    if (!std::getline(in, line)) throw ParseError("Matrix Market: fewer entries than declared");
    std::istringstream entry(line);
    long long i = 0, j = 0;
    double v = 1.0;
    if (!(entry >> i >> j) || (!pattern && !(entry >> v)))
      throw ParseError("Matrix Market: malformed entry on data line " + std::to_string(k + 1));
    if (i < 1 || j < 1 || i > rows || j > cols)
      throw ParseError("Matrix Market: entry index out of range on data line " + std::to_string(k + 1));
    triplets.push_back({static_cast<Index>(i - 1), static_cast<Index>(j - 1), v});
    if (symmetric && i != j) triplets.push_back({static_cast<Index>(j - 1), static_cast<Index>(i - 1), v});
  }
  try {
    return SparseMatrix::from_triplets(static_cast<Index>(rows), static_cast<Index>(cols), std::move(triplets));
  } catch (const std::exception& e) {
    throw ParseError(std::string("Matrix Market: ") + e.what());
  }
}

SparseMatrix read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("Matrix Market: cannot open " + path.string());
  return read(in);
}

void write(std::ostream& out, const SparseMatrix& a, Symmetry symmetry) {
  const bool sym = symmetry == Symmetry::symmetric;
  if (sym) require(a.is_symmetric(), "Matrix Market: symmetric output requires a symmetric matrix");
  std::vector<Triplet> entries;
  for (const Triplet& t : a.triplets())
    if (!sym || t.row >= t.col) entries.push_back(t);
  out << "%%MatrixMarket matrix coordinate real " << (sym ? "symmetric" : "general") << '\n';
  out << a.rows() << ' ' << a.cols() << ' ' << entries.size() << '\n';
  for (const Triplet& t : entries)
    out << t.row + 1 << ' ' << t.col + 1 << ' ' << io::format_double(t.value) << '\n';
}

void write(const std::filesystem::path& path, const SparseMatrix& a, Symmetry symmetry) {
  std::ofstream out(path);
  if (!out) throw ParseError("Matrix Market: cannot write " + path.string());
  write(out, a, symmetry);
}

}  // namespace bkr::mm
