#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace snchol {

using index_t = std::int64_t;

constexpr index_t kNone = -1;

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a pivot is not strictly positive during numeric factorization.
/// `column` is the index in the original (unpermuted) matrix.
class NotSpdError : public std::runtime_error {
 public:
  NotSpdError(index_t column, const std::string& what)
      : std::runtime_error(what), column(column) {}
  index_t column;
};

/// Lower-triangular CSC storage of a sparse symmetric matrix.
/// Row indices are strictly increasing within a column and every diagonal
/// entry is present; nnz_full counts off-diagonals twice.
struct SparseSymmetric {
  index_t n = 0;
  std::vector<index_t> col_ptr;  // n+1 offsets
  std::vector<index_t> row_idx;  // lower triangle incl. diagonal
  std::vector<double> values;
  index_t nnz_full = 0;

  index_t nnz() const { return col_ptr.empty() ? 0 : col_ptr[n]; }
};

inline double density(const SparseSymmetric& a) {
  if (a.n < 1) throw std::invalid_argument("density: empty matrix");
  return static_cast<double>(a.nnz_full) /
         (static_cast<double>(a.n) * static_cast<double>(a.n));
}

/// Checks the structural invariants of the canonical layout; throws on violation.
inline void validate(const SparseSymmetric& a) {
  if (a.n < 0) throw std::invalid_argument("negative dimension");
  if (static_cast<index_t>(a.col_ptr.size()) != a.n + 1)
    throw std::invalid_argument("col_ptr size mismatch");
  if (a.col_ptr[0] != 0) throw std::invalid_argument("col_ptr[0] != 0");
  if (a.col_ptr[a.n] != static_cast<index_t>(a.row_idx.size()) ||
      a.row_idx.size() != a.values.size())
    throw std::invalid_argument("col_ptr[n] does not match nnz");
  for (index_t j = 0; j < a.n; ++j) {
    if (a.col_ptr[j] > a.col_ptr[j + 1])
      throw std::invalid_argument("col_ptr not non-decreasing");
    if (a.col_ptr[j] == a.col_ptr[j + 1] ||
        a.row_idx[a.col_ptr[j]] != j)
      throw std::invalid_argument("missing diagonal entry in column " +
                                  std::to_string(j));
    if (a.values[a.col_ptr[j]] <= 0.0)
      throw std::invalid_argument("non-positive diagonal in column " +
                                  std::to_string(j));
    for (index_t p = a.col_ptr[j]; p < a.col_ptr[j + 1]; ++p) {
      if (a.row_idx[p] < j || a.row_idx[p] >= a.n)
        throw std::invalid_argument("row index out of range in column " +
                                    std::to_string(j));
      if (p > a.col_ptr[j] && a.row_idx[p] <= a.row_idx[p - 1])
        throw std::invalid_argument("row indices not strictly increasing");
    }
  }
  index_t expect_full = 2 * a.nnz() - a.n;
  if (a.nnz_full != expect_full)
    throw std::invalid_argument("nnz_full inconsistent with stored triangle");
}

/// Assembles canonical lower-CSC storage from triplets (duplicates summed,
/// entries may be in either triangle; mirrored into the lower one).
inline SparseSymmetric from_triplets(index_t n, std::vector<index_t> rows,
                                     std::vector<index_t> cols,
                                     std::vector<double> vals) {
  if (rows.size() != cols.size() || rows.size() != vals.size())
    throw std::invalid_argument("triplet arrays disagree in length");
  SparseSymmetric a;
  a.n = n;
  const std::size_t m = rows.size();
  for (std::size_t k = 0; k < m; ++k) {
    if (rows[k] < 0 || rows[k] >= n || cols[k] < 0 || cols[k] >= n)
      throw ParseError("entry (" + std::to_string(rows[k]) + "," +
                       std::to_string(cols[k]) + ") out of range for n=" +
                       std::to_string(n));
    if (rows[k] < cols[k]) std::swap(rows[k], cols[k]);
  }
  // count, fill, then sort+dedupe per column
  std::vector<index_t> count(static_cast<std::size_t>(n), 0);
  for (std::size_t k = 0; k < m; ++k) count[cols[k]]++;
  a.col_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
  for (index_t j = 0; j < n; ++j) a.col_ptr[j + 1] = a.col_ptr[j] + count[j];
  std::vector<index_t> head(a.col_ptr.begin(), a.col_ptr.end() - 1);
  std::vector<index_t> ri(m);
  std::vector<double> vv(m);
  for (std::size_t k = 0; k < m; ++k) {
    index_t p = head[cols[k]]++;
    ri[p] = rows[k];
    vv[p] = vals[k];
  }
  a.row_idx.clear();
  a.values.clear();
  a.row_idx.reserve(m);
  a.values.reserve(m);
  std::vector<index_t> new_ptr(static_cast<std::size_t>(n) + 1, 0);
  std::vector<std::pair<index_t, double>> colbuf;
  for (index_t j = 0; j < n; ++j) {
    colbuf.clear();
    for (index_t p = a.col_ptr[j]; p < a.col_ptr[j + 1]; ++p)
      colbuf.emplace_back(ri[p], vv[p]);
    std::sort(colbuf.begin(), colbuf.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    const index_t col_begin = static_cast<index_t>(a.row_idx.size());
    for (const auto& [r, v] : colbuf) {
      if (static_cast<index_t>(a.row_idx.size()) > col_begin &&
          a.row_idx.back() == r) {
        a.values.back() += v;  // duplicate: sum
      } else {
        a.row_idx.push_back(r);
        a.values.push_back(v);
      }
    }
    new_ptr[j + 1] = static_cast<index_t>(a.row_idx.size());
  }
  a.col_ptr = std::move(new_ptr);
  a.nnz_full = 2 * a.nnz() - n;
  validate(a);
  return a;
}

}  // namespace snchol
