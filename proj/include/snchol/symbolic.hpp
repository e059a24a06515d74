#pragma once

#include <numeric>
#include <vector>

#include "snchol/ordering.hpp"
#include "snchol/sparse.hpp"

namespace snchol {

/// parent[j] > j or kNone; postorder lists every node after its descendants
/// (children visited in ascending order, so it is deterministic).
struct EliminationTree {
  std::vector<index_t> parent;
  std::vector<index_t> postorder;
};

namespace detail {

/// rowlist[i] = columns k < i with A(i,k) stored (the lower triangle by rows).
inline std::vector<std::vector<index_t>> build_row_lists(
    const SparseSymmetric& a) {
  std::vector<std::vector<index_t>> rowlist(static_cast<std::size_t>(a.n));
  for (index_t j = 0; j < a.n; ++j)
    for (index_t p = a.col_ptr[j]; p < a.col_ptr[j + 1]; ++p)
      if (a.row_idx[p] != j) rowlist[a.row_idx[p]].push_back(j);
  return rowlist;
}

inline std::vector<index_t> postorder_of(const std::vector<index_t>& parent) {
  const index_t n = static_cast<index_t>(parent.size());
  std::vector<std::vector<index_t>> children(static_cast<std::size_t>(n));
  std::vector<index_t> roots;
  for (index_t j = 0; j < n; ++j) {
    if (parent[j] == kNone)
      roots.push_back(j);
    else
      children[parent[j]].push_back(j);  // ascending since j ascends
  }
  std::vector<index_t> post;
  post.reserve(static_cast<std::size_t>(n));
  std::vector<std::pair<index_t, std::size_t>> stack;  // (node, next child)
  for (index_t r : roots) {
    stack.emplace_back(r, 0);
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      if (next < children[node].size()) {
        index_t c = children[node][next++];
        stack.emplace_back(c, 0);
      } else {
        post.push_back(node);
        stack.pop_back();
      }
    }
  }
  return post;
}

}  // namespace detail

/// Liu's near-linear elimination tree via path compression.
inline EliminationTree elimination_tree(const SparseSymmetric& a) {
  const index_t n = a.n;
  auto rowlist = detail::build_row_lists(a);
  EliminationTree t;
  t.parent.assign(static_cast<std::size_t>(n), kNone);
  std::vector<index_t> ancestor(static_cast<std::size_t>(n), kNone);
  for (index_t i = 0; i < n; ++i) {
    for (index_t k : rowlist[i]) {
      index_t j = k;
      while (j != kNone && j < i) {
        const index_t next = ancestor[j];
        ancestor[j] = i;
        if (next == kNone) t.parent[j] = i;
        j = next;
      }
    }
  }
  t.postorder = detail::postorder_of(t.parent);
  return t;
}

/// col_counts[j] = structural nnz of column j of L including the diagonal.
/// Simple row-subtree traversal, O(nnz(L)).
inline std::vector<index_t> column_counts(const SparseSymmetric& a,
                                          const EliminationTree& t) {
  const index_t n = a.n;
  auto rowlist = detail::build_row_lists(a);
  std::vector<index_t> cc(static_cast<std::size_t>(n), 1);
  std::vector<index_t> mark(static_cast<std::size_t>(n), kNone);
  for (index_t i = 0; i < n; ++i) {
    mark[i] = i;
    for (index_t k : rowlist[i]) {
      for (index_t j = k; j != kNone && j < i && mark[j] != i;
           j = t.parent[j]) {
        ++cc[j];
        mark[j] = i;
      }
    }
  }
  return cc;
}

/// Contiguous column ranges; snode_parent is the supernodal elimination tree.
struct SupernodePartition {
  index_t n_super = 0;
  std::vector<index_t> super_ptr;     // n_super+1 first-column offsets
  std::vector<index_t> col_to_super;  // n entries
  std::vector<index_t> snode_parent;  // n_super entries, > s or kNone

  index_t first_col(index_t s) const { return super_ptr[s]; }
  index_t last_col(index_t s) const { return super_ptr[s + 1] - 1; }
  index_t width(index_t s) const { return super_ptr[s + 1] - super_ptr[s]; }
};

namespace detail {

inline SupernodePartition partition_from_ptr(std::vector<index_t> super_ptr,
                                             const std::vector<index_t>& parent) {
  SupernodePartition part;
  part.n_super = static_cast<index_t>(super_ptr.size()) - 1;
  part.super_ptr = std::move(super_ptr);
  const index_t n = part.super_ptr.back();
  part.col_to_super.assign(static_cast<std::size_t>(n), 0);
  for (index_t s = 0; s < part.n_super; ++s)
    for (index_t j = part.super_ptr[s]; j < part.super_ptr[s + 1]; ++j)
      part.col_to_super[j] = s;
  part.snode_parent.assign(static_cast<std::size_t>(part.n_super), kNone);
  for (index_t s = 0; s < part.n_super; ++s) {
    const index_t p = parent[part.last_col(s)];
    part.snode_parent[s] = (p == kNone) ? kNone : part.col_to_super[p];
  }
  return part;
}

}  // namespace detail

/// Fundamental supernodes: column j+1 chains onto column j iff
/// parent[j] == j+1, j+1 has exactly one child, and
/// col_counts[j+1] == col_counts[j] - 1 (nested patterns).
/// Input must be postordered.
inline SupernodePartition find_supernodes(const EliminationTree& t,
                                          const std::vector<index_t>& cc) {
  const index_t n = static_cast<index_t>(t.parent.size());
  std::vector<index_t> child_count(static_cast<std::size_t>(n), 0);
  for (index_t j = 0; j < n; ++j)
    if (t.parent[j] != kNone) ++child_count[t.parent[j]];
  std::vector<index_t> super_ptr;
  super_ptr.push_back(0);
  for (index_t j = 1; j < n; ++j) {
    const bool chained = t.parent[j - 1] == j && child_count[j] == 1 &&
                         cc[j] == cc[j - 1] - 1;
    if (!chained) super_ptr.push_back(j);
  }
  super_ptr.push_back(n);
  if (n == 0) super_ptr.assign(1, 0);
  return detail::partition_from_ptr(std::move(super_ptr), t.parent);
}

struct AmalgamationParams {
  double max_zero_ratio = 0.05;
  index_t small_limit = 4;
};

/// Relaxed amalgamation: a child supernode merges into the adjacent parent
/// when both are narrow (≤ small_limit) or when the fraction of explicit
/// zeros the merge introduces stays within max_zero_ratio.
inline SupernodePartition amalgamate(const SupernodePartition& part,
                                     const std::vector<index_t>& cc,
                                     const EliminationTree& t,
                                     const AmalgamationParams& params) {
  const index_t ns = part.n_super;
  if (ns <= 1) return part;
  auto trapezoid = [](index_t w, index_t h) {
    return w * h - w * (w - 1) / 2;
  };
  // per fundamental supernode: width, first-column height, true nonzeros
  std::vector<index_t> w0(ns), h0(ns), nz0(ns);
  for (index_t s = 0; s < ns; ++s) {
    w0[s] = part.width(s);
    h0[s] = cc[part.first_col(s)];
    nz0[s] = trapezoid(w0[s], h0[s]);  // fundamental blocks have no zeros
  }
  // left-to-right accumulation merges each chain bottom-up
  std::vector<index_t> super_ptr;
  super_ptr.push_back(0);
  index_t cw = w0[0], ch = h0[0], cnz = nz0[0], ccells = trapezoid(cw, ch);
  for (index_t s = 1; s < ns; ++s) {
    bool merge = false;
    if (part.snode_parent[s - 1] == s) {  // adjacent parent in the tree
      if (cw <= params.small_limit && w0[s] <= params.small_limit) {
        merge = true;
      } else {
        const index_t mw = cw + w0[s];
        const index_t mh = cw + h0[s];
        const index_t mcells = trapezoid(mw, mh);
        const index_t mnz = cnz + nz0[s];
        const index_t old_zeros = (ccells - cnz) + (trapezoid(w0[s], h0[s]) - nz0[s]);
        const index_t new_zeros = (mcells - mnz) - old_zeros;
        merge = static_cast<double>(new_zeros) <=
                params.max_zero_ratio * static_cast<double>(mcells);
      }
    }
    if (merge) {
      ch = cw + h0[s];
      cw = cw + w0[s];
      cnz += nz0[s];
      ccells = trapezoid(cw, ch);
    } else {
      super_ptr.push_back(part.first_col(s));
      cw = w0[s];
      ch = h0[s];
      cnz = nz0[s];
      ccells = trapezoid(cw, ch);
    }
  }
  super_ptr.push_back(part.super_ptr[ns]);
  return detail::partition_from_ptr(std::move(super_ptr), t.parent);
}

/// Full symbolic analysis output: everything the numeric phase and the
/// granularity heuristics need. `perm` is the composed permutation
/// (fill-reducing then postorder), identity unless set by analyze().
struct SymbolicFactor {
  index_t n = 0;
  EliminationTree etree;
  SupernodePartition partition;
  std::vector<index_t> col_counts;
  // per-supernode sorted row indices below the diagonal block
  std::vector<index_t> rows_ptr;  // n_super+1
  std::vector<index_t> rows;
  // update lists: STi[STp[s]..STp[s+1]) = supernodes updating s, incl. s
  std::vector<index_t> st_ptr;
  std::vector<index_t> st_idx;
  std::vector<index_t> inner_counts;  // C[s] = updates excluding s itself
  Permutation perm;

  index_t n_super() const { return partition.n_super; }
  index_t block_height(index_t s) const {
    return partition.width(s) + rows_ptr[s + 1] - rows_ptr[s];
  }
  /// Structural nnz of L (no amalgamation zeros).
  index_t factor_nnz() const {
    return std::accumulate(col_counts.begin(), col_counts.end(), index_t{0});
  }
  index_t total_inner() const {
    return std::accumulate(inner_counts.begin(), inner_counts.end(),
                           index_t{0});
  }
};

/// Builds snode_rows, STp/STi and C for a final partition of (postordered) A.
inline SymbolicFactor supernodal_structure(const SparseSymmetric& a,
                                           const SupernodePartition& part) {
  SymbolicFactor sym;
  sym.n = a.n;
  sym.etree = elimination_tree(a);
  sym.partition = part;
  sym.perm = natural_ordering(a.n);

  const index_t n = a.n;
  const index_t ns = part.n_super;
  auto rowlist = detail::build_row_lists(a);
  sym.col_counts.assign(static_cast<std::size_t>(n), 1);
  std::vector<std::vector<index_t>> srows(static_cast<std::size_t>(ns));
  std::vector<index_t> mark(static_cast<std::size_t>(n), kNone);
  for (index_t i = 0; i < n; ++i) {
    mark[i] = i;
    for (index_t k : rowlist[i]) {
      for (index_t j = k; j != kNone && j < i && mark[j] != i;
           j = sym.etree.parent[j]) {
        ++sym.col_counts[j];
        mark[j] = i;
        const index_t s = part.col_to_super[j];
        if (i > part.last_col(s)) {
          auto& rs = srows[s];
          if (rs.empty() || rs.back() != i) rs.push_back(i);
        }
      }
    }
  }

  sym.rows_ptr.assign(static_cast<std::size_t>(ns) + 1, 0);
  for (index_t s = 0; s < ns; ++s)
    sym.rows_ptr[s + 1] = sym.rows_ptr[s] + static_cast<index_t>(srows[s].size());
  sym.rows.reserve(static_cast<std::size_t>(sym.rows_ptr[ns]));
  for (index_t s = 0; s < ns; ++s)
    sym.rows.insert(sym.rows.end(), srows[s].begin(), srows[s].end());

  // d updates s when d's below-block rows reach into s's column range
  std::vector<std::vector<index_t>> sources(static_cast<std::size_t>(ns));
  for (index_t d = 0; d < ns; ++d) {
    index_t last = kNone;
    for (index_t p = sym.rows_ptr[d]; p < sym.rows_ptr[d + 1]; ++p) {
      const index_t s = part.col_to_super[sym.rows[p]];
      if (s != last) {
        sources[s].push_back(d);  // d ascends outside, rows ascend inside
        last = s;
      }
    }
  }
  sym.st_ptr.assign(static_cast<std::size_t>(ns) + 1, 0);
  for (index_t s = 0; s < ns; ++s)
    sym.st_ptr[s + 1] = sym.st_ptr[s] + static_cast<index_t>(sources[s].size()) + 1;
  sym.st_idx.reserve(static_cast<std::size_t>(sym.st_ptr[ns]));
  sym.inner_counts.assign(static_cast<std::size_t>(ns), 0);
  for (index_t s = 0; s < ns; ++s) {
    sym.st_idx.insert(sym.st_idx.end(), sources[s].begin(), sources[s].end());
    sym.st_idx.push_back(s);  // self entry, mirrors Listing-style d==s skip
    sym.inner_counts[s] = static_cast<index_t>(sources[s].size());
  }
  return sym;
}

/// Keeps the candidate minimizing predicted nnz(L); ties keep the earlier one.
inline Permutation select_best_ordering(
    const SparseSymmetric& a, const std::vector<Permutation>& candidates) {
  if (candidates.empty())
    throw std::invalid_argument("select_best_ordering: no candidates");
  index_t best_nnz = -1;
  std::size_t best = 0;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const SparseSymmetric b = apply_permutation(a, candidates[c]);
    const EliminationTree t = elimination_tree(b);
    const auto cc = column_counts(b, t);
    const index_t nnz_l =
        std::accumulate(cc.begin(), cc.end(), index_t{0});
    if (best_nnz < 0 || nnz_l < best_nnz) {
      best_nnz = nnz_l;
      best = c;
    }
  }
  return candidates[best];
}

struct AnalyzeResult {
  SparseSymmetric permuted;  // (fill ∘ postorder) applied
  SymbolicFactor sym;        // carries the composed permutation
};

/// The whole analysis phase: permute, postorder, partition, amalgamate,
/// build update lists. Runs single-threaded.
inline AnalyzeResult analyze(const SparseSymmetric& a,
                             const Permutation& fill,
                             const AmalgamationParams& params = {}) {
  AnalyzeResult res;
  SparseSymmetric a1 = apply_permutation(a, fill);
  EliminationTree t1 = elimination_tree(a1);
  Permutation post = make_permutation(t1.postorder);
  res.permuted = apply_permutation(a1, post);
  EliminationTree t2 = elimination_tree(res.permuted);
  const auto cc = column_counts(res.permuted, t2);
  SupernodePartition part = find_supernodes(t2, cc);
  part = amalgamate(part, cc, t2, params);
  res.sym = supernodal_structure(res.permuted, part);
  res.sym.perm = compose(fill, post);
  return res;
}

}  // namespace snchol
