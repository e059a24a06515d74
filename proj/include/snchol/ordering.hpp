#pragma once

#include <fstream>
#include <numeric>
#include <queue>
#include <string>
#include <vector>

#include "snchol/sparse.hpp"

namespace snchol {

/// perm is new→old, inv is old→new; inv[perm[i]] == i.
struct Permutation {
  std::vector<index_t> perm;
  std::vector<index_t> inv;

  index_t size() const { return static_cast<index_t>(perm.size()); }
};

inline Permutation make_permutation(std::vector<index_t> perm) {
  Permutation p;
  const index_t n = static_cast<index_t>(perm.size());
  p.inv.assign(perm.size(), kNone);
  for (index_t i = 0; i < n; ++i) {
    if (perm[i] < 0 || perm[i] >= n || p.inv[perm[i]] != kNone)
      throw std::invalid_argument("permutation is not a bijection");
    p.inv[perm[i]] = i;
  }
  p.perm = std::move(perm);
  return p;
}

inline Permutation natural_ordering(index_t n) {
  std::vector<index_t> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), index_t{0});
  return make_permutation(std::move(perm));
}

/// (p then q): applying q to a matrix already permuted by p.
inline Permutation compose(const Permutation& p, const Permutation& q) {
  if (p.size() != q.size())
    throw std::invalid_argument("compose: size mismatch");
  std::vector<index_t> perm(p.perm.size());
  for (index_t i = 0; i < p.size(); ++i) perm[i] = p.perm[q.perm[i]];
  return make_permutation(std::move(perm));
}

/// Greedy minimum-degree on the quotient elimination graph (plain variant:
/// no supervariables, no multiple elimination). Ties break on the smallest
/// original index, so the result is deterministic.
inline Permutation min_degree_ordering(const SparseSymmetric& a) {
  const index_t n = a.n;
  // full symmetric adjacency, no self loops
  std::vector<std::vector<index_t>> adj(static_cast<std::size_t>(n));
  for (index_t j = 0; j < n; ++j) {
    for (index_t p = a.col_ptr[j]; p < a.col_ptr[j + 1]; ++p) {
      const index_t i = a.row_idx[p];
      if (i == j) continue;
      adj[j].push_back(i);
      adj[i].push_back(j);
    }
  }
  for (auto& list : adj) std::sort(list.begin(), list.end());

  std::vector<std::vector<index_t>> elem_vars;  // clique members per element
  std::vector<std::vector<index_t>> var_elems(static_cast<std::size_t>(n));
  std::vector<char> alive(static_cast<std::size_t>(n), 1);
  std::vector<index_t> degree(static_cast<std::size_t>(n), 0);
  std::vector<index_t> stamp(static_cast<std::size_t>(n), -1);
  index_t tick = 0;

  auto reachable = [&](index_t v, std::vector<index_t>& out) {
    // distinct alive neighbors of v through plain edges and elements
    ++tick;
    out.clear();
    stamp[v] = tick;
    for (index_t u : adj[v]) {
      if (alive[u] && stamp[u] != tick) {
        stamp[u] = tick;
        out.push_back(u);
      }
    }
    for (index_t e : var_elems[v]) {
      auto& vars = elem_vars[e];
      std::size_t w = 0;
      for (index_t u : vars) {
        if (!alive[u]) continue;  // prune dead members in place
        vars[w++] = u;
        if (stamp[u] != tick) {
          stamp[u] = tick;
          out.push_back(u);
        }
      }
      vars.resize(w);
    }
  };

  using Entry = std::pair<index_t, index_t>;  // (degree, vertex)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> heap;
  {
    std::vector<index_t> tmp;
    for (index_t v = 0; v < n; ++v) {
      reachable(v, tmp);
      degree[v] = static_cast<index_t>(tmp.size());
      heap.emplace(degree[v], v);
    }
  }

  std::vector<index_t> perm;
  perm.reserve(static_cast<std::size_t>(n));
  std::vector<index_t> clique, tmp, diff;
  for (index_t k = 0; k < n; ++k) {
    index_t pivot = kNone;
    while (!heap.empty()) {
      auto [d, v] = heap.top();
      if (!alive[v] || d != degree[v]) {
        heap.pop();
        continue;
      }
      pivot = v;
      heap.pop();
      break;
    }
    reachable(pivot, clique);
    std::sort(clique.begin(), clique.end());
    alive[pivot] = 0;
    perm.push_back(pivot);
    if (clique.empty()) continue;

    const index_t e_new = static_cast<index_t>(elem_vars.size());
    elem_vars.push_back(clique);
    const std::vector<index_t>& absorbed = var_elems[pivot];
    for (index_t u : clique) {
      // edges into the clique (and to the pivot) are now covered by e_new
      diff.clear();
      for (index_t w : adj[u])
        if (alive[w] && w != pivot &&
            !std::binary_search(clique.begin(), clique.end(), w))
          diff.push_back(w);
      adj[u].swap(diff);
      // elements of the pivot are absorbed into e_new
      auto& es = var_elems[u];
      std::size_t w = 0;
      for (index_t e : es) {
        bool dropped = std::find(absorbed.begin(), absorbed.end(), e) !=
                       absorbed.end();
        if (!dropped) es[w++] = e;
      }
      es.resize(w);
      es.push_back(e_new);
      reachable(u, tmp);
      degree[u] = static_cast<index_t>(tmp.size());
      heap.emplace(degree[u], u);
    }
    var_elems[pivot].clear();
  }
  return make_permutation(std::move(perm));
}

/// Returns PAPᵀ in canonical lower-CSC form.
inline SparseSymmetric apply_permutation(const SparseSymmetric& a,
                                         const Permutation& p) {
  if (p.size() != a.n)
    throw std::invalid_argument("apply_permutation: dimension mismatch");
  std::vector<index_t> rows, cols;
  std::vector<double> vals;
  rows.reserve(a.row_idx.size());
  cols.reserve(a.row_idx.size());
  vals.reserve(a.row_idx.size());
  for (index_t j = 0; j < a.n; ++j) {
    for (index_t q = a.col_ptr[j]; q < a.col_ptr[j + 1]; ++q) {
      rows.push_back(p.inv[a.row_idx[q]]);
      cols.push_back(p.inv[j]);
      vals.push_back(a.values[q]);
    }
  }
  return from_triplets(a.n, std::move(rows), std::move(cols), std::move(vals));
}

/// One 0-based index per line, n lines, new→old; validated as a bijection.
inline Permutation read_permutation_file(const std::string& path, index_t n) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open permutation file '" + path + "'");
  std::vector<index_t> perm;
  perm.reserve(static_cast<std::size_t>(n));
  index_t v;
  while (in >> v) perm.push_back(v);
  if (static_cast<index_t>(perm.size()) != n)
    throw ParseError(path + ": expected " + std::to_string(n) +
                     " indices, found " + std::to_string(perm.size()));
  try {
    return make_permutation(std::move(perm));
  } catch (const std::invalid_argument& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace snchol
