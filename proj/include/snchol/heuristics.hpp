#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "snchol/sparse.hpp"
#include "snchol/symbolic.hpp"

namespace snchol {

enum class Strategy {
  kNonNested,
  kNested,
  kOptD,
  kOptDCost,
  kKernelParallel,
  kAuto,
};

enum class ExecMode { kTaskBased, kKernelParallel };

inline const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::kNonNested: return "non-nested";
    case Strategy::kNested: return "nested";
    case Strategy::kOptD: return "opt-d";
    case Strategy::kOptDCost: return "opt-d-cost";
    case Strategy::kKernelParallel: return "kernel-parallel";
    case Strategy::kAuto: return "auto";
  }
  return "?";
}

inline const char* to_string(ExecMode m) {
  return m == ExecMode::kTaskBased ? "task-based" : "kernel-parallel";
}

inline std::optional<Strategy> strategy_from_name(const std::string& name) {
  for (Strategy s : {Strategy::kNonNested, Strategy::kNested, Strategy::kOptD,
                     Strategy::kOptDCost, Strategy::kKernelParallel,
                     Strategy::kAuto})
    if (name == to_string(s)) return s;
  return std::nullopt;
}

/// Every tunable of the granularity heuristics, defaulting to the published
/// constants. All of them are exposed as CLI flags.
struct StrategyConfig {
  Strategy strategy = Strategy::kAuto;
  std::optional<index_t> d_override;
  index_t cost_threshold = 50000;  // flops gating inner-task creation
  index_t threads = 1;
  double goal_divisor = 14.0;
  double goal_factor = 1.1;
  double d_cap_fraction = 0.3;
  double outer_floor_fraction = 0.001;
  double mode_size_hi = 50.0;
  double mode_size_lo = 20.0;
  double mode_density = 1e-4;
  AmalgamationParams amalg;
  bool global_lock = false;    // one lock for every assembly
  bool deterministic = false;  // defer assemblies, apply in update order
  bool record_trace = true;

  void check() const {
    if (threads < 1) throw std::invalid_argument("threads must be >= 1");
    if (cost_threshold < 0)
      throw std::invalid_argument("cost_threshold must be >= 0");
    if (d_cap_fraction <= 0.0 || d_cap_fraction > 1.0)
      throw std::invalid_argument("d_cap_fraction must be in (0,1]");
  }
};

constexpr index_t kNoSplit = std::numeric_limits<index_t>::max();

/// Per-supernode split decisions for one factorization run.
struct NestingPlan {
  index_t d = kNoSplit;  // kNoSplit encodes D = infinity (never split)
  std::vector<char> split;
  ExecMode mode = ExecMode::kTaskBased;
  index_t predicted_tasks = 0;
};

/// Picks the nesting threshold D for the given inner-task count distribution.
/// Walks a bucket histogram of C from the largest count downward until the
/// task total reaches goalTasks, D falls under the cap, and enough outer
/// tasks are split.
inline index_t opt_d(index_t n, index_t n_super, const std::vector<index_t>& c,
                     double goal_factor = 1.1, double goal_divisor = 14.0,
                     double d_cap_fraction = 0.3,
                     double outer_floor_fraction = 0.001) {
  if (c.empty() || static_cast<index_t>(c.size()) != n_super || n_super < 1)
    throw std::invalid_argument("opt_d: C must have n_super >= 1 entries");
  const double goal_tasks =
      std::max(goal_factor * static_cast<double>(n_super),
               static_cast<double>(n) / goal_divisor);
  index_t max_children = 0;
  for (index_t ci : c) max_children = std::max(max_children, ci);
  std::vector<index_t> buckets(static_cast<std::size_t>(max_children) + 1, 0);
  for (index_t ci : c) ++buckets[ci];
  index_t d = max_children + 1;
  index_t num_outer = 0;
  index_t num_tasks = n_super;
  while ((static_cast<double>(num_tasks) < goal_tasks ||
          static_cast<double>(d) >
              d_cap_fraction * static_cast<double>(max_children) ||
          static_cast<double>(num_outer) <
              outer_floor_fraction * static_cast<double>(n_super)) &&
         d > 0) {
    --d;
    num_outer += buckets[d];
    num_tasks += d * buckets[d];
  }
  return d;
}

inline index_t opt_d(index_t n, index_t n_super, const std::vector<index_t>& c,
                     const StrategyConfig& cfg) {
  return opt_d(n, n_super, c, cfg.goal_factor, cfg.goal_divisor,
               cfg.d_cap_fraction, cfg.outer_floor_fraction);
}

/// Flop count of one update: SYRK on the rows hitting the destination's
/// diagonal block plus GEMM for the rows below it (multiply-adds count 2,
/// the symmetric part computes the lower triangle only).
inline index_t inner_task_cost(index_t k, index_t rows_diag,
                               index_t rows_below) {
  return rows_diag * (rows_diag + 1) * k + 2 * rows_below * rows_diag * k;
}

/// The §-style gate: a task cheaper than the threshold is kept embedded.
inline bool should_create_inner(index_t cost, const StrategyConfig& cfg) {
  return cost >= cfg.cost_threshold;
}

/// Hybrid dispatch on average supernode width and matrix density
/// (strict inequalities on all three thresholds).
inline ExecMode select_execution_mode(double avg_supernode_width,
                                      double matrix_density,
                                      const StrategyConfig& cfg) {
  if (avg_supernode_width > cfg.mode_size_hi) return ExecMode::kKernelParallel;
  if (avg_supernode_width > cfg.mode_size_lo &&
      matrix_density < cfg.mode_density)
    return ExecMode::kKernelParallel;
  return ExecMode::kTaskBased;
}

namespace detail {

inline NestingPlan plan_from_d(const SymbolicFactor& sym, index_t d,
                               ExecMode mode) {
  NestingPlan plan;
  plan.d = d;
  plan.mode = mode;
  const index_t ns = sym.n_super();
  plan.split.assign(static_cast<std::size_t>(ns), 0);
  plan.predicted_tasks = ns;
  if (mode == ExecMode::kTaskBased && d != kNoSplit) {
    for (index_t s = 0; s < ns; ++s) {
      if (sym.inner_counts[s] >= d) {
        plan.split[s] = 1;
        plan.predicted_tasks += sym.inner_counts[s];
      }
    }
  }
  return plan;
}

}  // namespace detail

/// Resolves the configured strategy into concrete split decisions.
/// The cost gate is applied during factorization, not in the prediction.
inline NestingPlan build_plan(const SparseSymmetric& a,
                              const SymbolicFactor& sym,
                              const StrategyConfig& cfg) {
  cfg.check();
  const index_t ns = sym.n_super();
  switch (cfg.strategy) {
    case Strategy::kNonNested:
      return detail::plan_from_d(sym, kNoSplit, ExecMode::kTaskBased);
    case Strategy::kNested:
      return detail::plan_from_d(sym, 1, ExecMode::kTaskBased);
    case Strategy::kOptD:
    case Strategy::kOptDCost: {
      const index_t d = cfg.d_override
                            ? *cfg.d_override
                            : opt_d(a.n, ns, sym.inner_counts, cfg);
      return detail::plan_from_d(sym, d, ExecMode::kTaskBased);
    }
    case Strategy::kKernelParallel:
      return detail::plan_from_d(sym, kNoSplit, ExecMode::kKernelParallel);
    case Strategy::kAuto: {
      const double width = static_cast<double>(a.n) / static_cast<double>(ns);
      const ExecMode mode = select_execution_mode(width, density(a), cfg);
      if (mode == ExecMode::kKernelParallel)
        return detail::plan_from_d(sym, kNoSplit, ExecMode::kKernelParallel);
      const index_t d = cfg.d_override
                            ? *cfg.d_override
                            : opt_d(a.n, ns, sym.inner_counts, cfg);
      return detail::plan_from_d(sym, d, ExecMode::kTaskBased);
    }
  }
  throw std::logic_error("unreachable strategy");
}

}  // namespace snchol
