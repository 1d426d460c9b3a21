#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "d2dcache/model.hpp"

namespace d2dcache {

enum class FileCase { clamped_one, clamped_zero, interior };

std::string_view to_string(FileCase c);

struct KktDiagnostics {
  std::vector<FileCase> cases;
  /// |v* - marginal_gain(c_m)| for interior files, 0 elsewhere.
  std::vector<double> stationarity_residuals;
  double sum_residual = 0.0;
  /// Caching probability above which the per-file objective is convex
  /// (1 when it is concave on all of [0, 1]).
  double inflection = 1.0;
  /// True when the multiplier search hit a jump in sum(c(v)) and the
  /// solution was recovered by enumerating KKT structures.
  bool duality_gap = false;
  std::vector<std::string> concavity_warnings;
};

struct KktSolution {
  CachingPolicy policy;
  double multiplier = 0.0;
  double objective = 0.0;
  KktDiagnostics diagnostics;
};

/// d/dc of q (c + (1 - c) c n_bar e^{-c n_bar} / Z):
///   q + (q n_bar e^{-c n_bar} / Z) (1 - c (2 + n_bar - n_bar c)).
double marginal_gain(double c, double q, double n_bar, double z);

/// Caching probability of one file for a given multiplier v*: 1 below the
/// lower threshold marginal_gain(1), 0 above the upper threshold
/// marginal_gain(0), otherwise a root of marginal_gain(c) = v*. Where the
/// per-file objective is not concave, candidates are ranked by
/// q F(c) - v* c, which reproduces the threshold rule in the concave case.
double solve_c_given_v(double v_star, double q, double n_bar, double z);

/// Maximizes the single-caterer lower bound on the offloading gain subject to
/// sum c = M and 0 <= c <= 1.
KktSolution solve_p1(const ContentLibrary& library, const NetworkConfig& cfg);

/// Same problem for arbitrary non-negative, non-increasing file weights
/// (the popularity need not be normalized).
KktSolution solve_p1_weights(std::span<const double> weights, std::size_t cache_size, double n_bar,
                             double z);

struct GridSearchResult {
  CachingPolicy policy;
  double objective = 0.0;
  std::size_t evaluated = 0;
};

/// Exhaustive search over {c : sum c = M, c_m in {0, step, 2 step, ..., 1}}.
/// Needs N_f <= 6 and step <= 0.05, where 1/step must be an integer.
GridSearchResult grid_search_oracle(const ContentLibrary& library, const NetworkConfig& cfg,
                                    double step);

struct ConcavityPoint {
  double c = 0.0;
  double second_derivative = 0.0;
  bool convex = false;
};

/// Second derivative of the per-file objective, by central differences of
/// marginal_gain, on an even grid over [0, 1].
std::vector<ConcavityPoint> concavity_report(double q, double n_bar, double z, int grid_points);

}  // namespace d2dcache
