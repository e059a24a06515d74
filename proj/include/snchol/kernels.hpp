#pragma once

#include <cmath>
#include <vector>

#include "snchol/sparse.hpp"
#include "snchol/thread_pool.hpp"

namespace snchol {

/// Packed column-major block, leading dimension == rows.
struct DenseBlock {
  index_t rows = 0;
  index_t cols = 0;
  std::vector<double> data;

  DenseBlock() = default;
  DenseBlock(index_t r, index_t c)
      : rows(r), cols(c), data(static_cast<std::size_t>(r * c), 0.0) {}

  double& at(index_t i, index_t j) { return data[j * rows + i]; }
  double at(index_t i, index_t j) const { return data[j * rows + i]; }
};

// View-level kernels. Every accumulation runs in ascending k order per output
// element, in the sequential and the parallel variant alike, so both produce
// bitwise-identical results. Parallel variants partition the output rows and
// never split a reduction.

/// In-place lower Cholesky of the leading order×order sub-block.
/// Returns the first column with a non-positive pivot, or kNone on success.
inline index_t potrf_lower(double* a, index_t lda, index_t order,
                           WorkerPool* pool = nullptr) {
  for (index_t j = 0; j < order; ++j) {
    auto update_rows = [&](index_t r0, index_t r1) {
      for (index_t k = 0; k < j; ++k) {
        const double c = a[k * lda + j];
        const double* colk = a + k * lda;
        double* colj = a + j * lda;
        for (index_t i = r0; i < r1; ++i) colj[i] -= colk[i] * c;
      }
    };
    const index_t m = order - j;
    if (pool && m > 64 && j > 8)
      pool->parallel_for(j, order, 32, update_rows);
    else
      update_rows(j, order);
    const double pivot = a[j * lda + j];
    if (!(pivot > 0.0)) return j;
    const double root = std::sqrt(pivot);
    a[j * lda + j] = root;
    for (index_t i = j + 1; i < order; ++i) a[j * lda + i] /= root;
  }
  return kNone;
}

/// B := B · L⁻ᵀ for the m×order block B and the lower factor L.
inline void trsm_right_lt(const double* l, index_t ldl, index_t order,
                          double* b, index_t ldb, index_t m,
                          WorkerPool* pool = nullptr) {
  for (index_t j = 0; j < order; ++j) {
    auto solve_rows = [&](index_t r0, index_t r1) {
      double* colj = b + j * ldb;
      for (index_t k = 0; k < j; ++k) {
        const double c = l[k * ldl + j];
        const double* colk = b + k * ldb;
        for (index_t i = r0; i < r1; ++i) colj[i] -= colk[i] * c;
      }
      const double d = l[j * ldl + j];
      for (index_t i = r0; i < r1; ++i) colj[i] /= d;
    };
    if (pool && m > 128 && j > 8)
      pool->parallel_for(0, m, 64, solve_rows);
    else
      solve_rows(0, m);
  }
}

/// out (m×m lower triangle, zero-initialized by the caller) += P·Pᵀ
/// for the m×k panel P.
inline void syrk_lower(const double* p, index_t ldp, index_t m, index_t k,
                       double* out, index_t ldo, WorkerPool* pool = nullptr) {
  auto rows = [&](index_t r0, index_t r1) {
    for (index_t kk = 0; kk < k; ++kk) {
      const double* colk = p + kk * ldp;
      for (index_t j = 0; j < r1; ++j) {
        const double c = colk[j];
        double* outj = out + j * ldo;
        for (index_t i = std::max(j, r0); i < r1; ++i)
          outj[i] += colk[i] * c;
      }
    }
  };
  if (pool && m * k > 4096)
    pool->parallel_for(0, m, 16, rows);
  else
    rows(0, m);
}

/// out (m×p, zero-initialized by the caller) += A·Bᵀ where A is m×k, B is p×k.
inline void gemm_nt(const double* a, index_t lda, index_t m, const double* b,
                    index_t ldb, index_t p, index_t k, double* out,
                    index_t ldo, WorkerPool* pool = nullptr) {
  auto rows = [&](index_t r0, index_t r1) {
    for (index_t kk = 0; kk < k; ++kk) {
      const double* acol = a + kk * lda;
      const double* bcol = b + kk * ldb;
      for (index_t j = 0; j < p; ++j) {
        const double c = bcol[j];
        double* outj = out + j * ldo;
        for (index_t i = r0; i < r1; ++i) outj[i] += acol[i] * c;
      }
    }
  };
  if (pool && m * p > 4096)
    pool->parallel_for(0, m, 16, rows);
  else
    rows(0, m);
}

// DenseBlock wrappers (the packed-block contracts). Passing a pool selects
// the parallel variant; the numbers are identical either way.

inline index_t dense_cholesky(DenseBlock& b, index_t order,
                              WorkerPool* pool = nullptr) {
  if (order > b.rows || order > b.cols)
    throw std::invalid_argument("dense_cholesky: order exceeds block");
  return potrf_lower(b.data.data(), b.rows, order, pool);
}

inline void triangular_solve_right(const DenseBlock& l, index_t order,
                                   DenseBlock& b, WorkerPool* pool = nullptr) {
  if (b.cols != order || order > l.rows || order > l.cols)
    throw std::invalid_argument("triangular_solve_right: shape mismatch");
  trsm_right_lt(l.data.data(), l.rows, order, b.data.data(), b.rows, b.rows,
                pool);
}

inline DenseBlock sym_rank_k(const DenseBlock& panel,
                             WorkerPool* pool = nullptr) {
  DenseBlock out(panel.rows, panel.rows);
  syrk_lower(panel.data.data(), panel.rows, panel.rows, panel.cols,
             out.data.data(), out.rows, pool);
  return out;
}

inline DenseBlock general_matmul(const DenseBlock& a, const DenseBlock& b,
                                 WorkerPool* pool = nullptr) {
  if (a.cols != b.cols)
    throw std::invalid_argument("general_matmul: inner dimensions differ");
  DenseBlock out(a.rows, b.rows);
  gemm_nt(a.data.data(), a.rows, a.rows, b.data.data(), b.rows, b.rows, a.cols,
          out.data.data(), out.rows, pool);
  return out;
}

}  // namespace snchol
