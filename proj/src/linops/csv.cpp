// Copyright (c) bkrylov contributors
// SPDX-License-Identifier: Apache-2.0
#include "bkr/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "bkr/error.hpp"

namespace bkr::io {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(std::ostream& out, const DenseBlock& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const DenseBlock& m) {
  std::ofstream out(path);
  if (!out) throw ParseError("csv: cannot write " + path.string());
  write_csv(out, m);
}

namespace {

double parse_double(const std::string& token, const std::string& where) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception&) {
    throw ParseError(where + ": cannot parse '" + token + "'");
  }
  if (token.find_first_not_of(" \t\r", used) != std::string::npos)
    throw ParseError(where + ": trailing characters in '" + token + "'");
  return v;
}

}  // namespace

DenseBlock read_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) row.push_back(parse_double(cell, "csv"));
    if (!rows.empty() && row.size() != rows.front().size()) throw ParseError("csv: ragged rows");
    rows.push_back(std::move(row));
  }
  const Index r = rows.size();
  const Index c = r ? rows.front().size() : 0;
  DenseBlock out(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) out(i, j) = rows[i][j];
  return out;
}

DenseBlock read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("csv: cannot open " + path.string());
  return read_csv(in);
}

void write_vector(const std::filesystem::path& path, const std::vector<double>& v) {
  std::ofstream out(path);
  if (!out) throw ParseError("vector: cannot write " + path.string());
  for (double x : v) out << format_double(x) << '\n';
}

std::vector<double> read_vector(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("vector: cannot open " + path.string());
  std::vector<double> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    out.push_back(parse_double(line.substr(first), "vector " + path.string()));
  }
  return out;
}

}  // namespace bkr::io
