#include "d2dcache/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>
#include <utility>

#include "d2dcache/analytic.hpp"
#include "d2dcache/errors.hpp"
#include "d2dcache/optimizer.hpp"
#include "d2dcache/simulator.hpp"

namespace d2dcache {

namespace {

constexpr std::string_view kSimulation = "simulation";

bool same_network(const NetworkConfig& a, const NetworkConfig& b) {
  return a.lambda_p == b.lambda_p && a.n_bar == b.n_bar && a.sigma == b.sigma &&
         a.alpha == b.alpha && a.gamma_d == b.gamma_d && a.theta == b.theta;
}

// Coverage evaluators are expensive to build and reusable for every caching
// probability at a fixed network, so sweeps that do not move the network
// share them.
class EvaluatorCache {
 public:
  explicit EvaluatorCache(QuadratureSpec quad) : quad_(std::move(quad)) {}

  const CoverageEvaluator& get(const NetworkConfig& cfg, CoverageMethod method) {
    for (const auto& e : entries_) {
      if (e.method == method && same_network(e.cfg, cfg)) return *e.evaluator;
    }
    if (entries_.size() >= 8) entries_.erase(entries_.begin());
    entries_.push_back({cfg, method, std::make_unique<CoverageEvaluator>(cfg, quad_, method)});
    return *entries_.back().evaluator;
  }

 private:
  struct Entry {
    NetworkConfig cfg;
    CoverageMethod method;
    std::unique_ptr<CoverageEvaluator> evaluator;
  };
  QuadratureSpec quad_;
  std::vector<Entry> entries_;
};

struct NamedPolicy {
  std::string name;
  CachingPolicy policy;
};

std::vector<NamedPolicy> baseline_policies(const ContentLibrary& lib, const NetworkConfig& cfg) {
  return {{"PC", solve_p1(lib, cfg).policy},
          {"Zipf", policy_zipf_proportional(lib)},
          {"CPF", policy_cpf(lib)}};
}

class RowWriter {
 public:
  RowWriter(ResultTable& table, const ExperimentSpec& spec) : table_(table), spec_(spec) {}

  // Parameter cells shared by the rows that follow.
  void params(std::vector<std::pair<std::string, Cell>> cells) { params_ = std::move(cells); }

  void analytic(std::string_view metric, std::string_view method, double value,
                bool used_qmc = false, std::string_view policy = {}) {
    auto row = start(metric, method, policy);
    table_.set(row, "value", value);
    if (used_qmc) table_.set(row, "seed", spec_.quadrature.qmc_seed);
    table_.add_row(std::move(row));
  }

  void simulated(std::string_view metric, const MonteCarloEstimate& est,
                 std::string_view policy = {}) {
    auto row = start(metric, kSimulation, policy);
    table_.set(row, "value", est.mean);
    table_.set(row, "ci_half_width", est.half_width_95);
    table_.set(row, "trials", est.trials);
    table_.set(row, "seed", est.seed);
    table_.add_row(std::move(row));
  }

 private:
  std::vector<Cell> start(std::string_view metric, std::string_view method,
                          std::string_view policy) {
    auto row = table_.blank_row();
    for (const auto& [name, cell] : params_) table_.set(row, name, cell);
    table_.set(row, "metric", std::string(metric));
    table_.set(row, "method", std::string(method));
    if (!policy.empty()) table_.set(row, "policy", std::string(policy));
    return row;
  }

  ResultTable& table_;
  const ExperimentSpec& spec_;
  std::vector<std::pair<std::string, Cell>> params_;
};

// Visits the Cartesian product of the sweep axes, last axis fastest.
template <class Fn>
void for_each_point(const ExperimentSpec& spec, Fn fn) {
  std::vector<std::size_t> index(spec.sweep.size(), 0);
  std::size_t points = 1;
  for (const auto& axis : spec.sweep) points *= axis.values.size();
  for (std::size_t n = 0; n < points; ++n) {
    ExperimentSpec point = spec;
    std::vector<std::pair<std::string, Cell>> cells;
    for (std::size_t a = 0; a < spec.sweep.size(); ++a) {
      const auto& axis = spec.sweep[a];
      const double v = axis.values[index[a]];
      apply_parameter(point, axis.parameter, v);
      cells.emplace_back(std::string(column_name(axis.parameter)), v);
    }
    fn(point, std::move(cells));
    for (std::size_t a = spec.sweep.size(); a-- > 0;) {
      if (++index[a] < spec.sweep[a].values.size()) break;
      index[a] = 0;
    }
  }
}

std::string describe(const std::vector<std::pair<std::string, Cell>>& cells) {
  std::ostringstream os;
  for (const auto& [name, cell] : cells) os << name << '=' << format_cell(cell) << ' ';
  return os.str();
}

void note(const ProgressFn& progress, const std::string& text) {
  if (progress) progress(text);
}

void coverage_rows(RowWriter& out, const ExperimentSpec& point, EvaluatorCache& cache) {
  const auto& cfg = point.network;
  out.analytic("coverage", to_string(CoverageMethod::exact_tcp),
               cache.get(cfg, CoverageMethod::exact_tcp)(point.c).value, true);
  out.analytic("coverage", to_string(CoverageMethod::ppp_bound),
               cache.get(cfg, CoverageMethod::ppp_bound)(point.c).value, true);
  if (point.trials > 0) {
    out.simulated("coverage",
                  estimate_coverage(point.c, cfg, point.trials, point.r_sim, point.seed));
  }
}

double offloading_rows(RowWriter& out, const ExperimentSpec& point, EvaluatorCache& cache) {
  const auto lib = point.library();
  const auto& cfg = point.network;
  const auto& exact = cache.get(cfg, CoverageMethod::exact_tcp);
  const auto exact_fn = [&](double c) { return exact(c).value; };
  double pc = 0.0;
  double zipf = 0.0;
  double pc_exact = 0.0;
  double zipf_exact = 0.0;
  for (const auto& [name, policy] : baseline_policies(lib, cfg)) {
    const double closed = offloading_closed_form_k1(policy, lib, cfg);
    const double full = offloading_gain(policy, lib, exact_fn);
    out.analytic("offloading", to_string(CoverageMethod::closed_form_k1), closed, false, name);
    out.analytic("offloading", to_string(CoverageMethod::exact_tcp), full, true, name);
    if (point.trials > 0) {
      out.simulated("offloading",
                    estimate_offloading(policy, lib, cfg, point.trials, point.seed,
                                        point.stratified, point.r_sim),
                    name);
    }
    if (name == "PC") {
      pc = closed;
      pc_exact = full;
    } else if (name == "Zipf") {
      zipf = closed;
      zipf_exact = full;
    }
  }
  out.analytic("relative-improvement", to_string(CoverageMethod::closed_form_k1),
               pc / zipf - 1.0, false, "PC/Zipf");
  out.analytic("relative-improvement", to_string(CoverageMethod::exact_tcp),
               pc_exact / zipf_exact - 1.0, true, "PC/Zipf");
  return pc / zipf - 1.0;
}

void run_coverage_vs_sigma(const ExperimentSpec& spec, ResultTable& table,
                           const ProgressFn& progress) {
  RowWriter out(table, spec);
  EvaluatorCache cache(spec.quadrature);
  for_each_point(spec, [&](const ExperimentSpec& point, auto cells) {
    cells.emplace_back("c", point.c);
    note(progress, describe(cells));
    out.params(std::move(cells));
    coverage_rows(out, point, cache);
  });
}

void run_offload_vs_beta(const ExperimentSpec& spec, ResultTable& table,
                         const ProgressFn& progress) {
  RowWriter out(table, spec);
  EvaluatorCache cache(spec.quadrature);
  for_each_point(spec, [&](const ExperimentSpec& point, auto cells) {
    note(progress, describe(cells));
    out.params(std::move(cells));
    offloading_rows(out, point, cache);
  });
}

void run_policy_histogram(const ExperimentSpec& spec, ResultTable& table,
                          const ProgressFn& progress) {
  RowWriter out(table, spec);
  EvaluatorCache cache(spec.quadrature);
  for (const auto& pc : spec.cases) {
    ExperimentSpec point = spec;
    point.network.sigma = pc.sigma;
    point.network.lambda_p = pc.lambda_p;
    const auto lib = point.library();
    const auto solution = solve_p1(lib, point.network);
    std::vector<std::pair<std::string, Cell>> base{{"sigma_m", pc.sigma},
                                                   {"lambda_p_per_m2", pc.lambda_p}};
    note(progress, describe(base));
    for (std::size_t m = 0; m < solution.policy.size(); ++m) {
      auto cells = base;
      cells.emplace_back("file", static_cast<std::uint64_t>(m + 1));
      out.params(std::move(cells));
      out.analytic("c_star", to_string(CoverageMethod::closed_form_k1), solution.policy[m]);
    }
    out.params(base);
    out.analytic("entropy", to_string(CoverageMethod::closed_form_k1),
                 policy_entropy(solution.policy));
    out.analytic("offloading", to_string(CoverageMethod::closed_form_k1), solution.objective);
    const auto& exact = cache.get(point.network, CoverageMethod::exact_tcp);
    out.analytic("offloading", to_string(CoverageMethod::exact_tcp),
                 offloading_gain(solution.policy, lib, [&](double c) { return exact(c).value; }),
                 true);
  }
}

void run_validate_bounds(const ExperimentSpec& spec, ResultTable& table,
                         const ProgressFn& progress) {
  RowWriter out(table, spec);
  const auto& cfg = spec.network;
  // 30 points over six decades centered on sigma^alpha, the natural scale of
  // t gamma_d for in-cluster serving distances.
  const double center = std::pow(cfg.sigma, cfg.alpha);
  for (int i = 0; i < 30; ++i) {
    const double t_gamma = center * std::pow(10.0, -3.0 + 6.0 * i / 29.0);
    const double exact = laplace_exact(t_gamma, cfg, spec.quadrature);
    const double bound = laplace_ppp_bound(t_gamma, cfg);
    out.params({{"t_gamma", t_gamma}});
    out.analytic("laplace", to_string(CoverageMethod::exact_tcp), exact);
    out.analytic("laplace", to_string(CoverageMethod::ppp_bound), bound);
    out.analytic("laplace-margin", "exact-minus-bound", exact - bound);
  }
  note(progress, "laplace grid done");

  // Single-caterer identity: the closed form c n e^{-c n} / Z against the
  // k = 1 term of the bound mixture evaluated by quadrature.
  const auto lib = spec.library();
  const auto policy = solve_p1(lib, cfg).policy;
  const double z = compute_z(cfg);
  const double p1 = coverage_given_k(1, cfg, spec.quadrature,
                                     [&](double t) { return laplace_ppp_bound(t, cfg); });
  out.params({});
  out.analytic("z", to_string(CoverageMethod::closed_form_k1), z);
  out.analytic("k1-coverage", "quadrature", p1);
  out.analytic("k1-coverage", to_string(CoverageMethod::closed_form_k1), 1.0 / z);
  for (std::size_t m = 0; m < policy.size(); ++m) {
    const double c = policy[m];
    const double weight = c * cfg.n_bar * std::exp(-c * cfg.n_bar);
    out.params({{"file", static_cast<std::uint64_t>(m + 1)}});
    out.analytic("identity-residual", "closed-form-minus-quadrature",
                 std::abs(weight / z - weight * p1));
  }
}

void run_custom_sweep(const ExperimentSpec& spec, ResultTable& table,
                      const ProgressFn& progress) {
  RowWriter out(table, spec);
  EvaluatorCache cache(spec.quadrature);
  for_each_point(spec, [&](const ExperimentSpec& point, auto cells) {
    note(progress, describe(cells));
    out.params(std::move(cells));
    for (Metric metric : spec.metrics) {
      if (metric == Metric::coverage) {
        coverage_rows(out, point, cache);
      } else {
        offloading_rows(out, point, cache);
      }
    }
  });
}

}  // namespace

std::vector<std::string> experiment_columns(const ExperimentSpec& spec) {
  std::vector<std::string> cols;
  switch (spec.kind) {
    case ExperimentKind::coverage_vs_sigma:
      cols = {"sigma_m", "lambda_p_per_m2", "c"};
      break;
    case ExperimentKind::offload_vs_beta:
      cols = {"beta", "policy"};
      break;
    case ExperimentKind::policy_histogram:
      cols = {"sigma_m", "lambda_p_per_m2", "file"};
      break;
    case ExperimentKind::validate_bounds:
      cols = {"t_gamma", "file"};
      break;
    case ExperimentKind::custom_sweep:
      for (const auto& axis : spec.sweep) cols.emplace_back(column_name(axis.parameter));
      if (std::find(spec.metrics.begin(), spec.metrics.end(), Metric::offloading) !=
          spec.metrics.end()) {
        cols.emplace_back("policy");
      }
      break;
  }
  for (const char* c : {"metric", "method", "value", "ci_half_width", "trials", "seed"}) {
    cols.emplace_back(c);
  }
  return cols;
}

ResultTable run_experiment(const ExperimentSpec& spec, const ProgressFn& progress) {
  ResultTable table(experiment_columns(spec));
  switch (spec.kind) {
    case ExperimentKind::coverage_vs_sigma: run_coverage_vs_sigma(spec, table, progress); break;
    case ExperimentKind::offload_vs_beta: run_offload_vs_beta(spec, table, progress); break;
    case ExperimentKind::policy_histogram: run_policy_histogram(spec, table, progress); break;
    case ExperimentKind::validate_bounds: run_validate_bounds(spec, table, progress); break;
    case ExperimentKind::custom_sweep: run_custom_sweep(spec, table, progress); break;
  }
  return table;
}

SolveReport solve(const ExperimentSpec& spec) {
  const auto lib = spec.library();
  auto solution = solve_p1(lib, spec.network);
  SolveReport report;
  report.entropy = policy_entropy(solution.policy);
  report.z = compute_z(spec.network);
  report.objective_closed_form = solution.objective;
  report.multiplier = solution.multiplier;
  report.policy = std::move(solution.policy);
  report.diagnostics = std::move(solution.diagnostics);
  return report;
}

}  // namespace d2dcache
