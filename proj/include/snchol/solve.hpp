#pragma once

#include <cmath>
#include <vector>

#include "snchol/factorize.hpp"

namespace snchol {

/// y = A·x for the full symmetric matrix held as a lower triangle.
inline std::vector<double> symmetric_matvec(const SparseSymmetric& a,
                                            const std::vector<double>& x) {
  if (static_cast<index_t>(x.size()) != a.n)
    throw std::invalid_argument("symmetric_matvec: dimension mismatch");
  std::vector<double> y(x.size(), 0.0);
  for (index_t j = 0; j < a.n; ++j) {
    for (index_t p = a.col_ptr[j]; p < a.col_ptr[j + 1]; ++p) {
      const index_t i = a.row_idx[p];
      y[i] += a.values[p] * x[j];
      if (i != j) y[j] += a.values[p] * x[i];
    }
  }
  return y;
}

/// Solves L·y = b in the permuted space, supernodes ascending.
inline std::vector<double> forward_solve(const NumericFactor& f,
                                         std::vector<double> b) {
  if (static_cast<index_t>(b.size()) != f.n)
    throw std::invalid_argument("forward_solve: dimension mismatch");
  for (index_t s = 0; s < f.n_super(); ++s) {
    const index_t first = f.first_col(s);
    const index_t w = f.width(s);
    const index_t h = f.height(s);
    const double* block = f.blocks[s].data();
    for (index_t j = 0; j < w; ++j) {
      for (index_t k = 0; k < j; ++k)
        b[first + j] -= block[k * h + j] * b[first + k];
      b[first + j] /= block[j * h + j];
    }
    for (index_t j = 0; j < w; ++j) {
      const double c = b[first + j];
      const double* panel = block + j * h + w;
      for (index_t p = f.rows_ptr[s]; p < f.rows_ptr[s + 1]; ++p)
        b[f.rows[p]] -= panel[p - f.rows_ptr[s]] * c;
    }
  }
  return b;
}

/// Solves Lᵀ·z = y in the permuted space, supernodes descending.
inline std::vector<double> backward_solve(const NumericFactor& f,
                                          std::vector<double> y) {
  if (static_cast<index_t>(y.size()) != f.n)
    throw std::invalid_argument("backward_solve: dimension mismatch");
  for (index_t s = f.n_super() - 1; s >= 0; --s) {
    const index_t first = f.first_col(s);
    const index_t w = f.width(s);
    const index_t h = f.height(s);
    const double* block = f.blocks[s].data();
    for (index_t j = w - 1; j >= 0; --j) {
      const double* panel = block + j * h + w;
      for (index_t p = f.rows_ptr[s]; p < f.rows_ptr[s + 1]; ++p)
        y[first + j] -= panel[p - f.rows_ptr[s]] * y[f.rows[p]];
      for (index_t k = j + 1; k < w; ++k)
        y[first + j] -= block[j * h + k] * y[first + k];
      y[first + j] /= block[j * h + j];
    }
  }
  return y;
}

/// x = A⁻¹ b through the permuted factor: Ly = Pb, Lᵀz = y, x = Pᵀz.
inline std::vector<double> solve(const NumericFactor& f,
                                 const std::vector<double>& b) {
  if (static_cast<index_t>(b.size()) != f.n)
    throw std::invalid_argument("solve: dimension mismatch");
  std::vector<double> pb(b.size());
  for (index_t i = 0; i < f.n; ++i) pb[i] = b[f.perm.perm[i]];
  std::vector<double> z = backward_solve(f, forward_solve(f, std::move(pb)));
  std::vector<double> x(b.size());
  for (index_t i = 0; i < f.n; ++i) x[f.perm.perm[i]] = z[i];
  return x;
}

/// ‖A·x − b‖∞ — the residual the CLI reports after a solve.
inline double solve_residual(const SparseSymmetric& a,
                             const std::vector<double>& x,
                             const std::vector<double>& b) {
  const std::vector<double> ax = symmetric_matvec(a, x);
  double r = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i)
    r = std::max(r, std::abs(ax[i] - b[i]));
  return r;
}

}  // namespace snchol
