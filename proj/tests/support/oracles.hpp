#pragma once

// Test-side oracles, kept independent of the library's implementation paths:
// dense boolean elimination for symbolic checks, a naive dense Cholesky for
// numeric checks, naive triple-loop products for the kernel contracts, and
// deterministic instance generators.

#include <cmath>
#include <random>
#include <vector>

#include "snchol/sparse.hpp"

namespace oracle {

using snchol::index_t;
using snchol::SparseSymmetric;

/// Dense boolean Cholesky: the structural pattern of L (lower, incl. diag).
inline std::vector<char> dense_symbolic_pattern(const SparseSymmetric& a) {
  const index_t n = a.n;
  std::vector<char> pat(static_cast<std::size_t>(n * n), 0);
  for (index_t j = 0; j < n; ++j)
    for (index_t p = a.col_ptr[j]; p < a.col_ptr[j + 1]; ++p)
      pat[j * n + a.row_idx[p]] = 1;
  for (index_t j = 0; j < n; ++j)
    for (index_t k = 0; k < j; ++k)
      if (pat[k * n + j])
        for (index_t i = j + 1; i < n; ++i)
          if (pat[k * n + i]) pat[j * n + i] = 1;
  return pat;
}

inline std::vector<index_t> pattern_column_counts(const std::vector<char>& pat,
                                                  index_t n) {
  std::vector<index_t> cc(static_cast<std::size_t>(n), 0);
  for (index_t j = 0; j < n; ++j)
    for (index_t i = j; i < n; ++i)
      if (pat[j * n + i]) ++cc[j];
  return cc;
}

inline std::vector<index_t> pattern_etree_parents(const std::vector<char>& pat,
                                                  index_t n) {
  std::vector<index_t> parent(static_cast<std::size_t>(n), snchol::kNone);
  for (index_t j = 0; j < n; ++j)
    for (index_t i = j + 1; i < n; ++i)
      if (pat[j * n + i]) {
        parent[j] = i;
        break;
      }
  return parent;
}

/// Naive in-place dense lower Cholesky, column-major. Returns false on a
/// non-positive pivot.
inline bool dense_cholesky(std::vector<double>& m, index_t n) {
  for (index_t j = 0; j < n; ++j) {
    for (index_t k = 0; k < j; ++k) {
      const double c = m[k * n + j];
      for (index_t i = j; i < n; ++i) m[j * n + i] -= m[k * n + i] * c;
    }
    if (!(m[j * n + j] > 0.0)) return false;
    const double root = std::sqrt(m[j * n + j]);
    m[j * n + j] = root;
    for (index_t i = j + 1; i < n; ++i) m[j * n + i] /= root;
  }
  return true;
}

inline std::vector<double> to_dense_lower(const SparseSymmetric& a) {
  std::vector<double> m(static_cast<std::size_t>(a.n * a.n), 0.0);
  for (index_t j = 0; j < a.n; ++j)
    for (index_t p = a.col_ptr[j]; p < a.col_ptr[j + 1]; ++p)
      m[j * a.n + a.row_idx[p]] = a.values[p];
  return m;
}

/// Dense solve through the naive factorization (for solve-phase checks).
inline std::vector<double> dense_solve(const SparseSymmetric& a,
                                       const std::vector<double>& b) {
  const index_t n = a.n;
  std::vector<double> m = to_dense_lower(a);
  if (!dense_cholesky(m, n)) throw std::runtime_error("oracle: not SPD");
  std::vector<double> x = b;
  for (index_t j = 0; j < n; ++j) {
    for (index_t k = 0; k < j; ++k) x[j] -= m[k * n + j] * x[k];
    x[j] /= m[j * n + j];
  }
  for (index_t j = n - 1; j >= 0; --j) {
    for (index_t k = j + 1; k < n; ++k) x[j] -= m[j * n + k] * x[k];
    x[j] /= m[j * n + j];
  }
  return x;
}

/// Naive triple-loop C = A·Bᵀ with the inner loop over k ascending.
inline std::vector<double> matmul_nt(const std::vector<double>& a, index_t m,
                                     const std::vector<double>& b, index_t p,
                                     index_t k) {
  std::vector<double> c(static_cast<std::size_t>(m * p), 0.0);
  for (index_t j = 0; j < p; ++j)
    for (index_t i = 0; i < m; ++i) {
      double sum = 0.0;
      for (index_t kk = 0; kk < k; ++kk) sum += a[kk * m + i] * b[kk * p + j];
      c[j * m + i] = sum;
    }
  return c;
}

/// Naive lower-triangle P·Pᵀ, inner loop over k ascending.
inline std::vector<double> syrk_lower_naive(const std::vector<double>& panel,
                                            index_t m, index_t k) {
  std::vector<double> c(static_cast<std::size_t>(m * m), 0.0);
  for (index_t j = 0; j < m; ++j)
    for (index_t i = j; i < m; ++i) {
      double sum = 0.0;
      for (index_t kk = 0; kk < k; ++kk)
        sum += panel[kk * m + i] * panel[kk * m + j];
      c[j * m + i] = sum;
    }
  return c;
}

// ---------------------------------------------------------------------------
// instance generators

/// Strictly diagonally dominant symmetric matrix with a random pattern:
/// SPD by construction, pattern exactly as sampled.
inline SparseSymmetric random_spd(std::mt19937_64& rng, index_t n,
                                  double target_density) {
  std::vector<index_t> rows, cols;
  std::vector<double> vals;
  const double m_off =
      std::max(0.0, (target_density * static_cast<double>(n) * n - n) / 2.0);
  const double pairs = static_cast<double>(n) * (n - 1) / 2.0;
  const double p = pairs > 0 ? std::min(1.0, m_off / pairs) : 0.0;
  std::bernoulli_distribution pick(p);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  std::vector<double> row_abs(static_cast<std::size_t>(n), 0.0);
  for (index_t i = 1; i < n; ++i)
    for (index_t j = 0; j < i; ++j)
      if (p > 0 && pick(rng)) {
        const double v = val(rng);
        rows.push_back(i);
        cols.push_back(j);
        vals.push_back(v);
        row_abs[i] += std::abs(v);
        row_abs[j] += std::abs(v);
      }
  for (index_t i = 0; i < n; ++i) {
    rows.push_back(i);
    cols.push_back(i);
    vals.push_back(1.0 + row_abs[i]);
  }
  return snchol::from_triplets(n, std::move(rows), std::move(cols),
                               std::move(vals));
}

/// 5-point 2D Laplacian with Dirichlet boundary on an nx×ny grid.
inline SparseSymmetric laplacian_2d(index_t nx, index_t ny) {
  std::vector<index_t> rows, cols;
  std::vector<double> vals;
  auto id = [nx](index_t x, index_t y) { return y * nx + x; };
  for (index_t y = 0; y < ny; ++y)
    for (index_t x = 0; x < nx; ++x) {
      const index_t v = id(x, y);
      rows.push_back(v);
      cols.push_back(v);
      vals.push_back(4.0);
      if (x + 1 < nx) {
        rows.push_back(id(x + 1, y));
        cols.push_back(v);
        vals.push_back(-1.0);
      }
      if (y + 1 < ny) {
        rows.push_back(id(x, y + 1));
        cols.push_back(v);
        vals.push_back(-1.0);
      }
    }
  return snchol::from_triplets(nx * ny, std::move(rows), std::move(cols),
                               std::move(vals));
}

/// Tridiagonal with the given diagonal and off-diagonal values.
inline SparseSymmetric tridiagonal(index_t n, double diag, double off) {
  std::vector<index_t> rows, cols;
  std::vector<double> vals;
  for (index_t i = 0; i < n; ++i) {
    rows.push_back(i);
    cols.push_back(i);
    vals.push_back(diag);
    if (i + 1 < n) {
      rows.push_back(i + 1);
      cols.push_back(i);
      vals.push_back(off);
    }
  }
  return snchol::from_triplets(n, std::move(rows), std::move(cols),
                               std::move(vals));
}

/// n=4 arrowhead: full diagonal plus a full last row.
inline SparseSymmetric arrowhead4() {
  std::vector<index_t> rows = {0, 1, 2, 3, 3, 3, 3};
  std::vector<index_t> cols = {0, 1, 2, 3, 0, 1, 2};
  std::vector<double> vals = {4.0, 4.0, 4.0, 4.0, 1.0, 1.0, 1.0};
  return snchol::from_triplets(4, std::move(rows), std::move(cols),
                               std::move(vals));
}

/// Star K1,4 with the center at column `center`.
inline SparseSymmetric star5(index_t center) {
  std::vector<index_t> rows, cols;
  std::vector<double> vals;
  for (index_t i = 0; i < 5; ++i) {
    rows.push_back(i);
    cols.push_back(i);
    vals.push_back(5.0);
  }
  for (index_t i = 0; i < 5; ++i)
    if (i != center) {
      rows.push_back(std::max(i, center));
      cols.push_back(std::min(i, center));
      vals.push_back(1.0);
    }
  return snchol::from_triplets(5, std::move(rows), std::move(cols),
                               std::move(vals));
}

/// The six-supernode example tree: supernodes {0..5} singleton columns,
/// update edges 0→3, 1→3, 2→4, 3→5, 4→5, so C = [0,0,0,2,1,2].
inline SparseSymmetric fig2_matrix() {
  std::vector<index_t> rows = {0, 1, 2, 3, 4, 5, 3, 3, 4, 5, 5};
  std::vector<index_t> cols = {0, 1, 2, 3, 4, 5, 0, 1, 2, 3, 4};
  std::vector<double> vals(11, 1.0);
  for (int i = 0; i < 6; ++i) vals[i] = 4.0;
  return snchol::from_triplets(6, std::move(rows), std::move(cols),
                               std::move(vals));
}

// ---------------------------------------------------------------------------
// error measures

inline double frobenius_of_symmetric(const SparseSymmetric& a) {
  double sum = 0.0;
  for (index_t j = 0; j < a.n; ++j)
    for (index_t p = a.col_ptr[j]; p < a.col_ptr[j + 1]; ++p) {
      const double v = a.values[p] * a.values[p];
      sum += a.row_idx[p] == j ? v : 2.0 * v;
    }
  return std::sqrt(sum);
}

inline double inf_norm_of_symmetric(const SparseSymmetric& a) {
  std::vector<double> row_sum(static_cast<std::size_t>(a.n), 0.0);
  for (index_t j = 0; j < a.n; ++j)
    for (index_t p = a.col_ptr[j]; p < a.col_ptr[j + 1]; ++p) {
      row_sum[a.row_idx[p]] += std::abs(a.values[p]);
      if (a.row_idx[p] != j) row_sum[j] += std::abs(a.values[p]);
    }
  double m = 0.0;
  for (double r : row_sum) m = std::max(m, r);
  return m;
}

}  // namespace oracle
