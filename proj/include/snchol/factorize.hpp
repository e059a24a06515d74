#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstring>
#include <memory>
#include <mutex>
#include <vector>

#include "snchol/heuristics.hpp"
#include "snchol/kernels.hpp"
#include "snchol/symbolic.hpp"
#include "snchol/thread_pool.hpp"

namespace snchol {

struct TaskRecord {
  enum class Kind { kOuter, kInner };
  Kind kind = Kind::kOuter;
  index_t supernode = 0;
  index_t source = kNone;  // inner tasks only
  std::uint64_t start_ns = 0;
  std::uint64_t end_ns = 0;
  int worker = -1;
};

/// One guarded scatter-add into a destination supernode (for the
/// mutual-exclusion trace checks).
struct AssemblySpan {
  index_t supernode = 0;
  std::uint64_t start_ns = 0;
  std::uint64_t end_ns = 0;
  int worker = -1;
};

struct ExecutionStats {
  index_t n_outer = 0;
  index_t n_inner_created = 0;
  index_t n_inner_embedded = 0;
  double wall_seconds = 0.0;
  std::vector<TaskRecord> records;
  std::vector<AssemblySpan> assembly_spans;
};

/// Packed factor: per supernode one column-major block holding the diagonal
/// block on top of the sub-diagonal panel (leading dimension = block height).
struct NumericFactor {
  index_t n = 0;
  Permutation perm;  // composed (fill-reducing then postorder), new→old
  SupernodePartition partition;
  std::vector<index_t> rows_ptr;  // per-supernode below-block rows
  std::vector<index_t> rows;
  std::vector<std::vector<double>> blocks;

  index_t n_super() const { return partition.n_super; }
  index_t width(index_t s) const { return partition.width(s); }
  index_t first_col(index_t s) const { return partition.first_col(s); }
  index_t height(index_t s) const {
    return width(s) + rows_ptr[s + 1] - rows_ptr[s];
  }
};

namespace detail {

inline std::uint64_t now_ns() {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(
          std::chrono::steady_clock::now().time_since_epoch())
          .count());
}

struct WorkerScratch {
  std::vector<index_t> row_loc;    // global row -> local offset, per stamp
  std::vector<index_t> row_stamp;  // supernode id the entry is valid for
  std::vector<double> temp;        // update workspace

  void init(index_t n) {
    row_loc.assign(static_cast<std::size_t>(n), 0);
    row_stamp.assign(static_cast<std::size_t>(n), kNone);
  }
  double* temp_of(index_t size) {
    if (static_cast<index_t>(temp.size()) < size) temp.resize(size);
    std::memset(temp.data(), 0, static_cast<std::size_t>(size) * sizeof(double));
    return temp.data();
  }
};

/// Shared state of one task-based factorization run.
struct RunState {
  const SparseSymmetric* a = nullptr;
  const SymbolicFactor* sym = nullptr;
  const NestingPlan* plan = nullptr;
  const StrategyConfig* cfg = nullptr;
  NumericFactor* factor = nullptr;
  WorkerPool* pool = nullptr;

  std::vector<index_t> dep_ptr, dep_idx;  // reverse update edges (dep_out)
  std::unique_ptr<std::atomic<index_t>[]> indegree;
  std::unique_ptr<std::atomic<index_t>[]> pending_inner;
  std::vector<std::mutex> snode_locks;
  std::mutex global_lock;
  std::atomic<index_t> fail_col{kNone};  // permuted column of first bad pivot

  std::atomic<index_t> created{0}, embedded{0};
  std::vector<WorkerScratch> scratch;
  std::vector<std::vector<TaskRecord>> records;
  std::vector<std::vector<AssemblySpan>> spans;

  // deterministic mode: per-supernode deferred update arena
  std::vector<std::vector<double>> arenas;
  std::vector<std::vector<index_t>> arena_offsets;

  std::mutex& lock_of(index_t s) {
    return cfg->global_lock ? global_lock : snode_locks[s];
  }
};

inline void build_reverse_edges(const SymbolicFactor& sym,
                                std::vector<index_t>& dep_ptr,
                                std::vector<index_t>& dep_idx) {
  const index_t ns = sym.n_super();
  dep_ptr.assign(static_cast<std::size_t>(ns) + 1, 0);
  for (index_t s = 0; s < ns; ++s)
    for (index_t p = sym.st_ptr[s]; p < sym.st_ptr[s + 1]; ++p)
      if (sym.st_idx[p] != s) ++dep_ptr[sym.st_idx[p] + 1];
  for (index_t s = 0; s < ns; ++s) dep_ptr[s + 1] += dep_ptr[s];
  dep_idx.assign(static_cast<std::size_t>(dep_ptr[ns]), 0);
  std::vector<index_t> head(dep_ptr.begin(), dep_ptr.end() - 1);
  for (index_t s = 0; s < ns; ++s)
    for (index_t p = sym.st_ptr[s]; p < sym.st_ptr[s + 1]; ++p) {
      const index_t d = sym.st_idx[p];
      if (d != s) dep_idx[head[d]++] = s;
    }
}

inline void build_row_map(RunState& st, int worker, index_t s) {
  auto& sc = st.scratch[worker];
  const auto& sym = *st.sym;
  const index_t w = sym.partition.width(s);
  for (index_t p = sym.rows_ptr[s]; p < sym.rows_ptr[s + 1]; ++p) {
    const index_t g = sym.rows[p];
    sc.row_loc[g] = w + (p - sym.rows_ptr[s]);
    sc.row_stamp[g] = s;
  }
}

inline index_t row_local(RunState& st, int worker, index_t s, index_t g) {
  auto& sc = st.scratch[worker];
  if (sc.row_stamp[g] != s) build_row_map(st, worker, s);
  return sc.row_loc[g];
}

inline void scatter_matrix_columns(RunState& st, int worker, index_t s) {
  const auto& a = *st.a;
  const auto& sym = *st.sym;
  const index_t first = sym.partition.first_col(s);
  const index_t last = sym.partition.last_col(s);
  const index_t h = sym.block_height(s);
  auto& block = st.factor->blocks[s];
  std::fill(block.begin(), block.end(), 0.0);
  for (index_t j = first; j <= last; ++j) {
    double* col = block.data() + (j - first) * h;
    for (index_t p = a.col_ptr[j]; p < a.col_ptr[j + 1]; ++p) {
      const index_t r = a.row_idx[p];
      if (r <= last)
        col[r - first] = a.values[p];
      else
        col[row_local(st, worker, s, r)] = a.values[p];
    }
  }
}

/// Row span of updating supernode d that lands in s: [lo,hi) hits s's
/// diagonal block, [hi,end) lands below it.
struct UpdateExtent {
  index_t lo = 0, hi = 0, end = 0;
  index_t rows_diag() const { return hi - lo; }
  index_t rows_below() const { return end - hi; }
};

inline UpdateExtent update_extent(const SymbolicFactor& sym, index_t d,
                                  index_t s) {
  const index_t* rb = sym.rows.data() + sym.rows_ptr[d];
  const index_t len = sym.rows_ptr[d + 1] - sym.rows_ptr[d];
  const index_t first = sym.partition.first_col(s);
  const index_t last = sym.partition.last_col(s);
  UpdateExtent e;
  e.lo = std::lower_bound(rb, rb + len, first) - rb;
  e.hi = std::upper_bound(rb + e.lo, rb + len, last) - rb;
  e.end = len;
  return e;
}

/// SYRK + GEMM of one update into `w1`/`w2` (contiguous row ranges of d's
/// packed panel, so no gather is needed).
inline void compute_update(RunState& st, index_t d, const UpdateExtent& e,
                           double* w1, double* w2) {
  const auto& sym = *st.sym;
  const index_t wd = sym.partition.width(d);
  const index_t hd = sym.block_height(d);
  const double* base = st.factor->blocks[d].data();
  const double* diag_rows = base + wd + e.lo;    // rows hitting s's block
  const double* below_rows = base + wd + e.hi;   // rows past s's block
  const index_t rs = e.rows_diag(), ro = e.rows_below();
  syrk_lower(diag_rows, hd, rs, wd, w1, rs);
  if (ro > 0) gemm_nt(below_rows, hd, ro, diag_rows, hd, rs, wd, w2, ro);
}

inline void scatter_update(RunState& st, int worker, index_t s, index_t d,
                           const UpdateExtent& e, const double* w1,
                           const double* w2) {
  const auto& sym = *st.sym;
  const index_t* rd = sym.rows.data() + sym.rows_ptr[d];
  const index_t first = sym.partition.first_col(s);
  const index_t h = sym.block_height(s);
  double* block = st.factor->blocks[s].data();
  const index_t rs = e.rows_diag(), ro = e.rows_below();
  for (index_t j = 0; j < rs; ++j) {
    const index_t cj = rd[e.lo + j] - first;
    double* col = block + cj * h;
    for (index_t i = j; i < rs; ++i)
      col[rd[e.lo + i] - first] -= w1[j * rs + i];
    for (index_t i = 0; i < ro; ++i)
      col[row_local(st, worker, s, rd[e.hi + i])] -= w2[j * ro + i];
  }
}

inline void apply_update_guarded(RunState& st, int worker, index_t s,
                                 index_t d, const UpdateExtent& e,
                                 const double* w1, const double* w2) {
  const bool tracing = st.cfg->record_trace;
  std::lock_guard<std::mutex> lk(st.lock_of(s));
  const std::uint64_t t0 = tracing ? now_ns() : 0;
  scatter_update(st, worker, s, d, e, w1, w2);
  if (tracing)
    st.spans[worker].push_back({s, t0, now_ns(), worker});
}

inline void run_inner_task(RunState& st, int worker, index_t s,
                           index_t st_index) {
  const auto& sym = *st.sym;
  const index_t d = sym.st_idx[st_index];
  const std::uint64_t t0 = st.cfg->record_trace ? now_ns() : 0;
  if (st.fail_col.load(std::memory_order_acquire) == kNone) {
    const UpdateExtent e = update_extent(sym, d, s);
    const index_t rs = e.rows_diag(), ro = e.rows_below();
    if (st.cfg->deterministic) {
      double* buf = st.arenas[s].data() +
                    st.arena_offsets[s][st_index - sym.st_ptr[s]];
      std::memset(buf, 0, static_cast<std::size_t>((rs + ro) * rs) * sizeof(double));
      compute_update(st, d, e, buf, buf + rs * rs);
    } else {
      double* buf = st.scratch[worker].temp_of((rs + ro) * rs);
      compute_update(st, d, e, buf, buf + rs * rs);
      apply_update_guarded(st, worker, s, d, e, buf, buf + rs * rs);
    }
  }
  if (st.cfg->record_trace)
    st.records[worker].push_back(
        {TaskRecord::Kind::kInner, s, d, t0, now_ns(), worker});
  st.pending_inner[s].fetch_sub(1, std::memory_order_release);
}

inline void run_outer_task(RunState& st, int worker, index_t s) {
  const auto& sym = *st.sym;
  const auto& plan = *st.plan;
  const std::uint64_t t0 = st.cfg->record_trace ? now_ns() : 0;
  const bool failed_already =
      st.fail_col.load(std::memory_order_acquire) != kNone;

  const index_t w = sym.partition.width(s);
  const index_t h = sym.block_height(s);
  const bool det = st.cfg->deterministic;

  if (!failed_already) {
    build_row_map(st, worker, s);
    scatter_matrix_columns(st, worker, s);

    if (det) {
      // One arena slot per update; assembly is deferred to the join point
      // and applied in update-list order for bit reproducibility.
      const index_t begin = sym.st_ptr[s], count = sym.st_ptr[s + 1] - begin;
      auto& offs = st.arena_offsets[s];
      offs.assign(static_cast<std::size_t>(count), 0);
      index_t total = 0;
      for (index_t p = begin; p < sym.st_ptr[s + 1]; ++p) {
        const index_t d = sym.st_idx[p];
        if (d == s) continue;
        const UpdateExtent e = update_extent(sym, d, s);
        offs[p - begin] = total;
        total += (e.rows_diag() + e.rows_below()) * e.rows_diag();
      }
      st.arenas[s].assign(static_cast<std::size_t>(total), 0.0);
    }

    for (index_t p = sym.st_ptr[s]; p < sym.st_ptr[s + 1]; ++p) {
      const index_t d = sym.st_idx[p];
      if (d == s) continue;
      const UpdateExtent e = update_extent(sym, d, s);
      const index_t cost = inner_task_cost(sym.partition.width(d),
                                           e.rows_diag(), e.rows_below());
      if (plan.split[s] && should_create_inner(cost, *st.cfg)) {
        st.created.fetch_add(1, std::memory_order_relaxed);
        st.pending_inner[s].fetch_add(1, std::memory_order_release);
        st.pool->push_inner({s, p}, worker);
      } else {
        st.embedded.fetch_add(1, std::memory_order_relaxed);
        const index_t rs = e.rows_diag(), ro = e.rows_below();
        if (det) {
          double* buf = st.arenas[s].data() + st.arena_offsets[s][p - sym.st_ptr[s]];
          compute_update(st, d, e, buf, buf + rs * rs);
        } else {
          double* buf = st.scratch[worker].temp_of((rs + ro) * rs);
          compute_update(st, d, e, buf, buf + rs * rs);
          apply_update_guarded(st, worker, s, d, e, buf, buf + rs * rs);
        }
      }
    }
  }

  // Listing-style taskwait: all updates must land before the factorization.
  st.pool->help_with_inner(worker, st.pending_inner[s]);

  if (!failed_already &&
      st.fail_col.load(std::memory_order_acquire) == kNone) {
    if (det) {
      // replay the deferred assemblies in update-list order
      for (index_t p = sym.st_ptr[s]; p < sym.st_ptr[s + 1]; ++p) {
        const index_t d = sym.st_idx[p];
        if (d == s) continue;
        const UpdateExtent e = update_extent(sym, d, s);
        const double* buf =
            st.arenas[s].data() + st.arena_offsets[s][p - sym.st_ptr[s]];
        apply_update_guarded(st, worker, s, d, e, buf,
                             buf + e.rows_diag() * e.rows_diag());
      }
      st.arenas[s].clear();
      st.arenas[s].shrink_to_fit();
    }
    double* block = st.factor->blocks[s].data();
    const index_t bad = potrf_lower(block, h, w);
    if (bad != kNone) {
      index_t expect = kNone;
      st.fail_col.compare_exchange_strong(expect,
                                          sym.partition.first_col(s) + bad);
    } else if (h > w) {
      trsm_right_lt(block, h, w, block + w, h, h - w);
    }
  }

  if (st.cfg->record_trace)
    st.records[worker].push_back(
        {TaskRecord::Kind::kOuter, s, kNone, t0, now_ns(), worker});

  // completion: release every dependent whose updates are all in
  for (index_t p = st.dep_ptr[s]; p < st.dep_ptr[s + 1]; ++p) {
    const index_t t = st.dep_idx[p];
    if (st.indegree[t].fetch_sub(1, std::memory_order_acq_rel) == 1)
      st.pool->push_outer({t, kNone}, worker);
  }
}

inline NumericFactor make_factor_shell(const SparseSymmetric& a,
                                       const SymbolicFactor& sym) {
  NumericFactor f;
  f.n = a.n;
  f.perm = sym.perm;
  f.partition = sym.partition;
  f.rows_ptr = sym.rows_ptr;
  f.rows = sym.rows;
  f.blocks.resize(static_cast<std::size_t>(sym.n_super()));
  for (index_t s = 0; s < sym.n_super(); ++s)
    f.blocks[s].resize(
        static_cast<std::size_t>(sym.block_height(s) * sym.partition.width(s)));
  return f;
}

inline void throw_not_spd(const SymbolicFactor& sym, index_t permuted_col) {
  const index_t original = sym.perm.perm[permuted_col];
  throw NotSpdError(original, "matrix is not positive definite: pivot <= 0 at column " +
                                  std::to_string(original));
}

}  // namespace detail

/// Left-looking supernodal factorization as a dependency-counted task graph.
/// Outer task = one supernode; split outer tasks spawn one inner task per
/// update that clears the cost gate.
inline std::pair<NumericFactor, ExecutionStats> factorize(
    const SparseSymmetric& a, const SymbolicFactor& sym,
    const NestingPlan& plan, const StrategyConfig& cfg);

/// Sequential supernode loop with internally parallel kernels (the
/// multi-threaded-BLAS execution mode).
inline std::pair<NumericFactor, ExecutionStats> kernel_parallel_factorize(
    const SparseSymmetric& a, const SymbolicFactor& sym,
    const StrategyConfig& cfg) {
  const auto t_begin = std::chrono::steady_clock::now();
  NumericFactor f = detail::make_factor_shell(a, sym);
  ExecutionStats stats;
  stats.n_outer = sym.n_super();

  WorkerPool pool(static_cast<int>(cfg.threads));
  detail::RunState st;
  st.a = &a;
  st.sym = &sym;
  st.cfg = &cfg;
  st.factor = &f;
  st.scratch.resize(1);
  st.scratch[0].init(a.n);
  st.records.resize(1);
  st.spans.resize(1);

  const index_t ns = sym.n_super();
  for (index_t s = 0; s < ns; ++s) {
    const std::uint64_t t0 = cfg.record_trace ? detail::now_ns() : 0;
    detail::build_row_map(st, 0, s);
    detail::scatter_matrix_columns(st, 0, s);
    for (index_t p = sym.st_ptr[s]; p < sym.st_ptr[s + 1]; ++p) {
      const index_t d = sym.st_idx[p];
      if (d == s) continue;
      const detail::UpdateExtent e = detail::update_extent(sym, d, s);
      const index_t rs = e.rows_diag(), ro = e.rows_below();
      double* buf = st.scratch[0].temp_of((rs + ro) * rs);
      const index_t wd = sym.partition.width(d);
      const index_t hd = sym.block_height(d);
      const double* base = f.blocks[d].data();
      syrk_lower(base + wd + e.lo, hd, rs, wd, buf, rs, &pool);
      if (ro > 0)
        gemm_nt(base + wd + e.hi, hd, ro, base + wd + e.lo, hd, rs, wd,
                buf + rs * rs, ro, &pool);
      detail::scatter_update(st, 0, s, d, e, buf, buf + rs * rs);
      ++stats.n_inner_embedded;
    }
    const index_t w = sym.partition.width(s);
    const index_t h = sym.block_height(s);
    double* block = f.blocks[s].data();
    const index_t bad = potrf_lower(block, h, w, &pool);
    if (bad != kNone)
      detail::throw_not_spd(sym, sym.partition.first_col(s) + bad);
    if (h > w) trsm_right_lt(block, h, w, block + w, h, h - w, &pool);
    if (cfg.record_trace)
      st.records[0].push_back(
          {TaskRecord::Kind::kOuter, s, kNone, t0, detail::now_ns(), -1});
  }
  stats.records = std::move(st.records[0]);
  stats.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin)
          .count();
  return {std::move(f), std::move(stats)};
}

inline std::pair<NumericFactor, ExecutionStats> factorize(
    const SparseSymmetric& a, const SymbolicFactor& sym,
    const NestingPlan& plan, const StrategyConfig& cfg) {
  cfg.check();
  if (a.n != sym.n || static_cast<index_t>(plan.split.size()) != sym.n_super())
    throw std::invalid_argument("factorize: inconsistent inputs");
  if (plan.mode == ExecMode::kKernelParallel)
    return kernel_parallel_factorize(a, sym, cfg);

  const auto t_begin = std::chrono::steady_clock::now();
  NumericFactor f = detail::make_factor_shell(a, sym);
  const index_t ns = sym.n_super();
  const int workers = static_cast<int>(cfg.threads);

  detail::RunState st;
  st.a = &a;
  st.sym = &sym;
  st.plan = &plan;
  st.cfg = &cfg;
  st.factor = &f;
  detail::build_reverse_edges(sym, st.dep_ptr, st.dep_idx);
  st.indegree = std::make_unique<std::atomic<index_t>[]>(ns);
  st.pending_inner = std::make_unique<std::atomic<index_t>[]>(ns);
  for (index_t s = 0; s < ns; ++s) {
    st.indegree[s].store(sym.inner_counts[s]);
    st.pending_inner[s].store(0);
  }
  if (!cfg.global_lock)
    st.snode_locks = std::vector<std::mutex>(static_cast<std::size_t>(ns));
  st.scratch.resize(static_cast<std::size_t>(workers));
  for (auto& sc : st.scratch) sc.init(a.n);
  st.records.resize(static_cast<std::size_t>(workers));
  st.spans.resize(static_cast<std::size_t>(workers));
  if (cfg.deterministic) {
    st.arenas.resize(static_cast<std::size_t>(ns));
    st.arena_offsets.resize(static_cast<std::size_t>(ns));
  }

  {
    WorkerPool pool(workers);
    st.pool = &pool;
    pool.begin_job([&st](const WorkerPool::Task& t, int worker) {
      if (t.b == kNone)
        detail::run_outer_task(st, worker, t.a);
      else
        detail::run_inner_task(st, worker, t.a, t.b);
    });
    int hint = 0;
    for (index_t s = 0; s < ns; ++s)
      if (sym.inner_counts[s] == 0) pool.push_outer({s, kNone}, hint++);
    pool.wait_all();
  }

  const index_t bad = st.fail_col.load();
  if (bad != kNone) detail::throw_not_spd(sym, bad);

  ExecutionStats stats;
  stats.n_outer = ns;
  stats.n_inner_created = st.created.load();
  stats.n_inner_embedded = st.embedded.load();
  for (auto& r : st.records)
    stats.records.insert(stats.records.end(), r.begin(), r.end());
  for (auto& sp : st.spans)
    stats.assembly_spans.insert(stats.assembly_spans.end(), sp.begin(),
                                sp.end());
  stats.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin)
          .count();
  return {std::move(f), std::move(stats)};
}

/// Deterministic single-thread baseline: NonNested with one worker applying
/// updates in update-list order. Repeated runs are bitwise identical.
inline NumericFactor sequential_reference_factorize(const SparseSymmetric& a,
                                                    const SymbolicFactor& sym) {
  StrategyConfig cfg;
  cfg.strategy = Strategy::kNonNested;
  cfg.threads = 1;
  cfg.record_trace = false;
  NestingPlan plan = detail::plan_from_d(sym, kNoSplit, ExecMode::kTaskBased);
  return factorize(a, sym, plan, cfg).first;
}

/// Assembles the factor into a dense n×n lower triangle (testing helper).
inline std::vector<double> factor_dense_lower(const NumericFactor& f) {
  std::vector<double> l(static_cast<std::size_t>(f.n * f.n), 0.0);
  for (index_t s = 0; s < f.n_super(); ++s) {
    const index_t first = f.first_col(s);
    const index_t w = f.width(s);
    const index_t h = f.height(s);
    const double* block = f.blocks[s].data();
    for (index_t j = 0; j < w; ++j) {
      for (index_t i = j; i < w; ++i)
        l[(first + j) * f.n + (first + i)] = block[j * h + i];
      for (index_t p = f.rows_ptr[s]; p < f.rows_ptr[s + 1]; ++p)
        l[(first + j) * f.n + f.rows[p]] =
            block[j * h + w + (p - f.rows_ptr[s])];
    }
  }
  return l;
}

}  // namespace snchol
