#pragma once

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "snchol/sparse.hpp"

namespace snchol {

namespace detail {

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace detail

/// Reads `%%MatrixMarket matrix coordinate real|integer symmetric`.
/// Only the lower triangle is retained (upper-triangle entries are mirrored),
/// duplicates are summed, indices converted to 0-based.
inline SparseSymmetric read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file");
  std::istringstream hdr(line);
  std::string banner, object, format, field, symmetry;
  hdr >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket")
    throw ParseError(path + ": missing %%MatrixMarket banner");
  object = detail::lower(object);
  format = detail::lower(format);
  field = detail::lower(field);
  symmetry = detail::lower(symmetry);
  if (object != "matrix" || format != "coordinate")
    throw ParseError(path + ": expected 'matrix coordinate', got '" + object +
                     " " + format + "'");
  if (field == "pattern")
    throw ParseError(path + ": pattern-only files carry no values");
  if (field != "real" && field != "integer")
    throw ParseError(path + ": unsupported field '" + field + "'");
  if (symmetry != "symmetric")
    throw ParseError(path + ": storage must be declared symmetric, got '" +
                     symmetry + "'");

  // skip comments and blank lines up to the size line
  index_t nrows = 0, ncols = 0;
  std::size_t nentries = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '%') continue;
    std::istringstream sz(line);
    if (!(sz >> nrows >> ncols >> nentries))
      throw ParseError(path + ": malformed size line '" + line + "'");
    break;
  }
  if (nrows <= 0 || nrows != ncols)
    throw ParseError(path + ": matrix must be square and non-empty (got " +
                     std::to_string(nrows) + "x" + std::to_string(ncols) + ")");

  std::vector<index_t> rows, cols;
  std::vector<double> vals;
  rows.reserve(nentries);
  cols.reserve(nentries);
  vals.reserve(nentries);
  std::size_t seen = 0;
  while (seen < nentries && std::getline(in, line)) {
    if (line.empty() || line[0] == '%') continue;
    std::istringstream es(line);
    index_t i, j;
    double v;
    if (!(es >> i >> j >> v))
      throw ParseError(path + ": malformed entry '" + line + "'");
    if (i < 1 || i > nrows || j < 1 || j > ncols)
      throw ParseError(path + ": index (" + std::to_string(i) + "," +
                       std::to_string(j) + ") out of range");
    rows.push_back(i - 1);
    cols.push_back(j - 1);
    vals.push_back(v);
    ++seen;
  }
  if (seen != nentries)
    throw ParseError(path + ": expected " + std::to_string(nentries) +
                     " entries, found " + std::to_string(seen));

  try {
    return from_triplets(nrows, std::move(rows), std::move(cols),
                         std::move(vals));
  } catch (const std::invalid_argument& e) {
    throw ParseError(path + ": " + e.what());
  }
}

/// Writes the canonical lower triangle back out; re-reading yields an
/// identical structure and values.
inline void write_matrix_market(const SparseSymmetric& a,
                                const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  out << "%%MatrixMarket matrix coordinate real symmetric\n";
  out << a.n << " " << a.n << " " << a.nnz() << "\n";
  char buf[64];
  for (index_t j = 0; j < a.n; ++j) {
    for (index_t p = a.col_ptr[j]; p < a.col_ptr[j + 1]; ++p) {
      std::snprintf(buf, sizeof(buf), "%lld %lld %.17g\n",
                    static_cast<long long>(a.row_idx[p] + 1),
                    static_cast<long long>(j + 1), a.values[p]);
      out << buf;
    }
  }
}

}  // namespace snchol
