#pragma once

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "snchol/factorize.hpp"
#include "snchol/heuristics.hpp"
#include "snchol/matrix_market.hpp"
#include "snchol/solve.hpp"
#include "snchol/symbolic.hpp"

namespace snchol {

/// Bucket array T of the distribution "outer tasks with x inner tasks";
/// zero buckets omitted, Σy == n_super.
inline std::vector<std::pair<index_t, index_t>> histogram_buckets(
    const SymbolicFactor& sym) {
  index_t max_c = 0;
  for (index_t c : sym.inner_counts) max_c = std::max(max_c, c);
  std::vector<index_t> buckets(static_cast<std::size_t>(max_c) + 1, 0);
  for (index_t c : sym.inner_counts) ++buckets[c];
  std::vector<std::pair<index_t, index_t>> out;
  for (index_t x = 0; x <= max_c; ++x)
    if (buckets[x] > 0) out.emplace_back(x, buckets[x]);
  return out;
}

inline void write_histogram_csv(const SymbolicFactor& sym,
                                const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  out << "x,y\n";
  for (const auto& [x, y] : histogram_buckets(sym))
    out << x << "," << y << "\n";
}

inline void write_trace_jsonl(const ExecutionStats& stats,
                              const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  for (const TaskRecord& r : stats.records) {
    nlohmann::json j;
    j["kind"] = r.kind == TaskRecord::Kind::kOuter ? "outer" : "inner";
    j["supernode"] = r.supernode;
    if (r.source == kNone)
      j["source"] = nullptr;
    else
      j["source"] = r.source;
    j["start_ns"] = r.start_ns;
    j["end_ns"] = r.end_ns;
    j["worker"] = r.worker;
    out << j.dump() << "\n";
  }
}

/// Supernode table, C array and the update lists — the analysis debug dump.
inline nlohmann::json symbolic_report_json(const SymbolicFactor& sym) {
  nlohmann::json j;
  j["n"] = sym.n;
  j["n_super"] = sym.n_super();
  j["factor_nnz"] = sym.factor_nnz();
  nlohmann::json table = nlohmann::json::array();
  for (index_t s = 0; s < sym.n_super(); ++s) {
    table.push_back({{"id", s},
                     {"first_col", sym.partition.first_col(s)},
                     {"width", sym.partition.width(s)},
                     {"height", sym.block_height(s)},
                     {"parent", sym.partition.snode_parent[s]},
                     {"c", sym.inner_counts[s]}});
  }
  j["supernodes"] = std::move(table);
  j["c"] = sym.inner_counts;
  j["st_ptr"] = sym.st_ptr;
  j["st_idx"] = sym.st_idx;
  return j;
}

struct StrategyResult {
  Strategy strategy = Strategy::kNonNested;
  bool failed = false;
  std::string error;
  double wall_mean = 0.0;
  double wall_min = 0.0;
  index_t n_inner_created = 0;
  index_t n_inner_embedded = 0;
  index_t total_tasks = 0;
  index_t chosen_d = kNoSplit;
  ExecMode mode = ExecMode::kTaskBased;
  double speedup_mean = 0.0;  // vs the baseline strategy; 0 when unavailable
};

struct BenchReport {
  std::string matrix;
  std::string error;  // set when the matrix could not be processed at all
  index_t n = 0;
  index_t nnz = 0;
  index_t n_super = 0;
  double avg_supernode_width = 0.0;
  double matrix_density = 0.0;
  index_t runs = 1;
  index_t threads = 1;
  std::string ordering;
  std::string scheduler = "fifo-per-worker+steal";
  bool warmup_excluded = false;
  std::string timing_note =
      "wall time covers the factorize call only (worker pool setup included, "
      "analysis and I/O excluded); first-touch page faults are inside the "
      "timed region";
  std::vector<StrategyResult> strategies;
};

inline nlohmann::json report_to_json(const BenchReport& r) {
  nlohmann::json j;
  j["matrix"] = r.matrix;
  if (!r.error.empty()) {
    j["error"] = r.error;
    return j;
  }
  j["n"] = r.n;
  j["nnz"] = r.nnz;
  j["n_super"] = r.n_super;
  j["avg_supernode_width"] = r.avg_supernode_width;
  j["density"] = r.matrix_density;
  j["runs"] = r.runs;
  j["threads"] = r.threads;
  j["ordering"] = r.ordering;
  j["scheduler"] = r.scheduler;
  j["warmup_excluded"] = r.warmup_excluded;
  j["timing_note"] = r.timing_note;
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : r.strategies) {
    nlohmann::json e;
    e["strategy"] = to_string(s.strategy);
    if (s.failed) {
      e["error"] = s.error;
    } else {
      e["wall_mean"] = s.wall_mean;
      e["wall_min"] = s.wall_min;
      e["n_inner_created"] = s.n_inner_created;
      e["n_inner_embedded"] = s.n_inner_embedded;
      e["total_tasks"] = s.total_tasks;
      if (s.mode == ExecMode::kTaskBased) {
        if (s.chosen_d == kNoSplit)
          e["chosen_d"] = "inf";
        else
          e["chosen_d"] = s.chosen_d;
      }
      e["mode"] = to_string(s.mode);
      if (s.speedup_mean > 0.0) e["speedup"] = s.speedup_mean;
    }
    arr.push_back(std::move(e));
  }
  j["strategies"] = std::move(arr);
  return j;
}

/// Analysis shared by every strategy of one benchmark campaign.
struct BenchInstance {
  SparseSymmetric permuted;
  SymbolicFactor sym;
  double matrix_density = 0.0;
  ExecutionStats last_stats;  // of the final run of the last strategy
};

inline BenchInstance prepare_instance(const SparseSymmetric& a,
                                      const Permutation& fill,
                                      const StrategyConfig& cfg) {
  BenchInstance inst;
  AnalyzeResult ar = analyze(a, fill, cfg.amalg);
  inst.permuted = std::move(ar.permuted);
  inst.sym = std::move(ar.sym);
  inst.matrix_density = density(a);
  return inst;
}

/// Repeats the numeric phase `runs` times for one strategy; analysis is the
/// caller's. One extra warm-up run is executed and discarded when runs >= 2.
inline StrategyResult bench_strategy(BenchInstance& inst, Strategy strategy,
                                     StrategyConfig cfg, index_t runs,
                                     bool* warmup_flag = nullptr) {
  StrategyResult res;
  res.strategy = strategy;
  cfg.strategy = strategy;
  NestingPlan plan = build_plan(inst.permuted, inst.sym, cfg);
  res.chosen_d = plan.d;
  res.mode = plan.mode;
  const bool warmup = runs >= 2;
  if (warmup_flag) *warmup_flag = warmup;
  try {
    double sum = 0.0, best = 0.0;
    for (index_t r = 0; r < runs + (warmup ? 1 : 0); ++r) {
      auto [factor, stats] = factorize(inst.permuted, inst.sym, plan, cfg);
      if (warmup && r == 0) continue;
      sum += stats.wall_seconds;
      best = (best == 0.0) ? stats.wall_seconds
                           : std::min(best, stats.wall_seconds);
      res.n_inner_created = stats.n_inner_created;
      res.n_inner_embedded = stats.n_inner_embedded;
      inst.last_stats = std::move(stats);
    }
    res.wall_mean = sum / static_cast<double>(runs);
    res.wall_min = best;
    res.total_tasks = inst.sym.n_super() + res.n_inner_created;
  } catch (const std::exception& e) {
    res.failed = true;
    res.error = e.what();
  }
  return res;
}

inline BenchReport run_benchmark(const std::string& name,
                                 const SparseSymmetric& a,
                                 const Permutation& fill,
                                 const std::string& ordering_name,
                                 const std::vector<Strategy>& strategies,
                                 const StrategyConfig& cfg, index_t runs,
                                 Strategy baseline,
                                 BenchInstance* instance_out = nullptr) {
  if (runs < 1) throw std::invalid_argument("runs must be >= 1");
  BenchReport report;
  report.matrix = name;
  report.n = a.n;
  report.nnz = a.nnz();
  report.runs = runs;
  report.threads = cfg.threads;
  report.ordering = ordering_name;

  BenchInstance inst = prepare_instance(a, fill, cfg);
  report.n_super = inst.sym.n_super();
  report.avg_supernode_width =
      static_cast<double>(a.n) / static_cast<double>(report.n_super);
  report.matrix_density = inst.matrix_density;

  for (Strategy s : strategies)
    report.strategies.push_back(
        bench_strategy(inst, s, cfg, runs, &report.warmup_excluded));

  const StrategyResult* base = nullptr;
  for (const auto& s : report.strategies)
    if (s.strategy == baseline && !s.failed) base = &s;
  if (base)
    for (auto& s : report.strategies)
      if (!s.failed && s.wall_mean > 0.0)
        s.speedup_mean = base->wall_mean / s.wall_mean;

  if (instance_out) *instance_out = std::move(inst);
  return report;
}

struct SweepRow {
  index_t d = 0;
  double wall_seconds = 0.0;
  index_t total_tasks = 0;
};

/// One factorization campaign per D with the plan forced to that D
/// (the cost gate still applies per cfg).
inline std::vector<SweepRow> sweep_d(BenchInstance& inst,
                                     const std::vector<index_t>& d_values,
                                     StrategyConfig cfg, index_t runs) {
  std::vector<SweepRow> rows;
  for (index_t d : d_values) {
    cfg.strategy = Strategy::kOptD;
    cfg.d_override = d;
    StrategyResult r = bench_strategy(inst, Strategy::kOptD, cfg, runs);
    if (r.failed) throw std::runtime_error("sweep failed at D=" +
                                           std::to_string(d) + ": " + r.error);
    rows.push_back({d, r.wall_mean, r.total_tasks});
  }
  return rows;
}

inline void write_sweep_csv(const std::vector<SweepRow>& rows,
                            const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  out << "D,wall_time,total_tasks\n";
  for (const auto& r : rows)
    out << r.d << "," << r.wall_seconds << "," << r.total_tasks << "\n";
}

inline void print_report_table(const BenchReport& r, std::ostream& os) {
  os << "matrix " << r.matrix;
  if (!r.error.empty()) {
    os << "  ERROR: " << r.error << "\n";
    return;
  }
  os << "  n=" << r.n << " nnz=" << r.nnz << " n_super=" << r.n_super
     << " avg_width=" << r.avg_supernode_width
     << " density=" << r.matrix_density << " ordering=" << r.ordering
     << " threads=" << r.threads << " runs=" << r.runs << "\n";
  char line[256];
  std::snprintf(line, sizeof(line), "  %-16s %12s %12s %10s %10s %8s %9s\n",
                "strategy", "wall_mean(s)", "wall_min(s)", "tasks", "inner",
                "D", "speedup");
  os << line;
  for (const auto& s : r.strategies) {
    if (s.failed) {
      std::snprintf(line, sizeof(line), "  %-16s FAILED: %s\n",
                    to_string(s.strategy), s.error.c_str());
      os << line;
      continue;
    }
    std::string dstr = s.mode == ExecMode::kKernelParallel ? "-"
                       : s.chosen_d == kNoSplit            ? "inf"
                               : std::to_string(s.chosen_d);
    std::string sp = s.speedup_mean > 0.0
                         ? (std::to_string(s.speedup_mean).substr(0, 5) + "x")
                         : "-";
    std::snprintf(line, sizeof(line),
                  "  %-16s %12.6f %12.6f %10lld %10lld %8s %9s\n",
                  to_string(s.strategy), s.wall_mean, s.wall_min,
                  static_cast<long long>(s.total_tasks),
                  static_cast<long long>(s.n_inner_created), dstr.c_str(),
                  sp.c_str());
    os << line;
  }
}

}  // namespace snchol
