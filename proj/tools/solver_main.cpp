// Benchmark and solve driver for the supernodal Cholesky library.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "snchol/snchol.hpp"

namespace {

using namespace snchol;

struct CliOptions {
  std::vector<std::string> matrices;
  std::vector<std::string> strategy_names{"auto"};
  std::string ordering = "mindeg";
  std::string baseline_name = "non-nested";
  index_t threads = 1;
  index_t runs = 1;
  index_t d_override = -1;
  index_t cost_threshold = 50000;
  double amalg_zero_ratio = 0.05;
  index_t amalg_small = 4;
  std::string histogram_path, trace_path, report_path, symbolic_path;
  std::vector<std::string> sweep;  // "a:b:step out.csv"
  std::string rhs_path, solution_path;
  bool global_lock = false;
  bool deterministic = false;
  bool keep_going = false;
};

std::vector<index_t> parse_sweep_range(const std::string& spec) {
  index_t a = 0, b = 0, step = 0;
  char c1 = 0, c2 = 0;
  std::istringstream ss(spec);
  if (!(ss >> a >> c1 >> b >> c2 >> step) || c1 != ':' || c2 != ':' ||
      step < 1 || a < 0 || b < a)
    throw std::runtime_error("bad sweep range '" + spec +
                             "', expected a:b:step");
  std::vector<index_t> out;
  for (index_t d = a; d <= b; d += step) out.push_back(d);
  return out;
}

Strategy parse_strategy(const std::string& name) {
  auto s = strategy_from_name(name);
  if (!s) throw std::runtime_error("unknown strategy '" + name + "'");
  return *s;
}

Permutation make_ordering(const std::string& spec, const SparseSymmetric& a) {
  if (spec == "natural") return natural_ordering(a.n);
  if (spec == "mindeg") return min_degree_ordering(a);
  if (spec.rfind("file:", 0) == 0)
    return read_permutation_file(spec.substr(5), a.n);
  throw std::runtime_error("unknown ordering '" + spec +
                           "' (natural|mindeg|file:<path>)");
}

std::vector<double> read_vector_file(const std::string& path, index_t n) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open rhs file '" + path + "'");
  std::vector<double> v;
  double x;
  while (in >> x) v.push_back(x);
  if (static_cast<index_t>(v.size()) != n)
    throw std::runtime_error(path + ": expected " + std::to_string(n) +
                             " values, found " + std::to_string(v.size()));
  return v;
}

int run_factor(const CliOptions& opt) {
  StrategyConfig cfg;
  cfg.threads = opt.threads;
  cfg.cost_threshold = opt.cost_threshold;
  cfg.amalg.max_zero_ratio = opt.amalg_zero_ratio;
  cfg.amalg.small_limit = opt.amalg_small;
  cfg.global_lock = opt.global_lock;
  cfg.deterministic = opt.deterministic;
  if (opt.d_override >= 0) cfg.d_override = opt.d_override;

  std::vector<Strategy> strategies;
  for (const auto& name : opt.strategy_names)
    strategies.push_back(parse_strategy(name));
  const Strategy baseline = parse_strategy(opt.baseline_name);

  const bool single_matrix_outputs =
      !opt.histogram_path.empty() || !opt.trace_path.empty() ||
      !opt.symbolic_path.empty() || !opt.sweep.empty() ||
      !opt.rhs_path.empty();
  if (single_matrix_outputs && opt.matrices.size() != 1) {
    std::cerr << "error: histogram/trace/sweep/rhs outputs need exactly one "
                 "matrix\n";
    return 1;
  }

  nlohmann::json reports = nlohmann::json::array();
  bool any_failed = false, not_spd = false;

  for (const std::string& path : opt.matrices) {
    BenchReport report;
    report.matrix = path;
    try {
      const SparseSymmetric a = read_matrix_market(path);
      const Permutation fill = make_ordering(opt.ordering, a);
      BenchInstance inst;
      report = run_benchmark(path, a, fill, opt.ordering, strategies, cfg,
                             opt.runs, baseline, &inst);
      for (const auto& s : report.strategies)
        if (s.failed) {
          any_failed = true;
          if (s.error.find("positive definite") != std::string::npos)
            not_spd = true;
        }

      if (!opt.histogram_path.empty())
        write_histogram_csv(inst.sym, opt.histogram_path);
      if (!opt.symbolic_path.empty()) {
        std::ofstream out(opt.symbolic_path);
        out << symbolic_report_json(inst.sym).dump(2) << "\n";
      }
      if (!opt.trace_path.empty())
        write_trace_jsonl(inst.last_stats, opt.trace_path);
      if (!opt.sweep.empty()) {
        auto d_values = parse_sweep_range(opt.sweep[0]);
        auto rows = sweep_d(inst, d_values, cfg, opt.runs);
        write_sweep_csv(rows, opt.sweep[1]);
      }
      if (!opt.rhs_path.empty()) {
        std::vector<double> b = read_vector_file(opt.rhs_path, a.n);
        StrategyConfig scfg = cfg;
        scfg.strategy = strategies.front();
        NestingPlan plan = build_plan(inst.permuted, inst.sym, scfg);
        auto [factor, stats] = factorize(inst.permuted, inst.sym, plan, scfg);
        std::vector<double> x = solve(factor, b);
        std::cout << "solve residual (inf-norm): "
                  << solve_residual(a, x, b) << "\n";
        if (!opt.solution_path.empty()) {
          std::ofstream out(opt.solution_path);
          char buf[40];
          for (double v : x) {
            std::snprintf(buf, sizeof(buf), "%.17g\n", v);
            out << buf;
          }
        }
      }
    } catch (const NotSpdError& e) {
      report.error = e.what();
      any_failed = true;
      not_spd = true;
    } catch (const std::exception& e) {
      report.error = e.what();
      any_failed = true;
    }
    print_report_table(report, std::cout);
    reports.push_back(report_to_json(report));
    if (!report.error.empty() && !opt.keep_going) break;
  }

  if (!opt.report_path.empty()) {
    std::ofstream out(opt.report_path);
    if (!out) {
      std::cerr << "error: cannot write report to " << opt.report_path << "\n";
      return 1;
    }
    out << reports.dump(2) << "\n";
  }

  if (opt.keep_going) return 0;
  if (not_spd) return 2;
  return any_failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse supernodal Cholesky benchmark and solver"};
  app.require_subcommand(1);
  CliOptions opt;

  CLI::App* factor = app.add_subcommand(
      "factor", "analyze + factorize matrices, compare nesting strategies");
  factor->add_option("matrices", opt.matrices, "Matrix Market input files")
      ->required()
      ->expected(-1);
  factor->add_option("--strategy", opt.strategy_names,
                     "non-nested|nested|opt-d|opt-d-cost|kernel-parallel|auto "
                     "(repeatable)");
  factor->add_option("--threads", opt.threads, "worker count");
  factor->add_option("--d", opt.d_override, "force the nesting threshold D");
  factor->add_option("--cost-threshold", opt.cost_threshold,
                     "inner-task flop gate (0 disables)");
  factor->add_option("--ordering", opt.ordering, "natural|mindeg|file:<path>");
  factor->add_option("--amalg-zero-ratio", opt.amalg_zero_ratio,
                     "max fraction of explicit zeros a merge may introduce");
  factor->add_option("--amalg-small", opt.amalg_small,
                     "always merge supernodes at most this wide");
  factor->add_option("--runs", opt.runs, "numeric repetitions per strategy");
  factor->add_option("--baseline", opt.baseline_name,
                     "strategy speedups are measured against");
  factor->add_option("--emit-histogram", opt.histogram_path,
                     "write the inner-per-outer histogram CSV");
  factor->add_option("--sweep-d", opt.sweep,
                     "a:b:step out.csv — factorize once per D in the range")
      ->expected(2);
  factor->add_option("--emit-trace", opt.trace_path,
                     "write task records as JSON lines");
  factor->add_option("--emit-symbolic", opt.symbolic_path,
                     "write the symbolic analysis report JSON");
  factor->add_option("--report", opt.report_path, "write the full JSON report");
  factor->add_option("--rhs", opt.rhs_path, "right-hand side, one real per line");
  factor->add_option("--solution", opt.solution_path, "write the solution");
  factor->add_flag("--global-lock", opt.global_lock,
                   "one global assembly lock instead of per-supernode locks");
  factor->add_flag("--deterministic", opt.deterministic,
                   "bit-reproducible assembly order at any thread count");
  factor->add_flag("--keep-going", opt.keep_going,
                   "record per-matrix failures and continue, exit 0");

  CLI11_PARSE(app, argc, argv);
  try {
    return run_factor(opt);
  } catch (const NotSpdError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
