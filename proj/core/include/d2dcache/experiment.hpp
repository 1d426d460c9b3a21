#pragma once

#include <functional>
#include <string>
#include <string_view>

#include "d2dcache/config.hpp"
#include "d2dcache/optimizer.hpp"
#include "d2dcache/results.hpp"

namespace d2dcache {

/// Optional progress sink; receives one short line per completed point.
using ProgressFn = std::function<void(std::string_view)>;

/// Result columns for an experiment: parameter columns first, then
/// metric, method, value, ci_half_width, trials, seed.
std::vector<std::string> experiment_columns(const ExperimentSpec& spec);

/// Runs the experiment described by `spec` (after finalize). Rows are ordered
/// by sweep index. Analytic rows leave ci_half_width and trials empty; their
/// seed is the quasi-Monte Carlo seed when one was used.
/// Throws NumericalError when an evaluation cannot reach its tolerance.
ResultTable run_experiment(const ExperimentSpec& spec, const ProgressFn& progress = {});

/// The caching-vector report printed by `solve`.
struct SolveReport {
  CachingPolicy policy;
  double objective_closed_form = 0.0;
  double multiplier = 0.0;
  double entropy = 0.0;
  double z = 0.0;
  KktDiagnostics diagnostics;
};

SolveReport solve(const ExperimentSpec& spec);

}  // namespace d2dcache
