#include "d2dcache/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <boost/math/tools/roots.hpp>

#include "d2dcache/analytic.hpp"
#include "d2dcache/errors.hpp"

namespace d2dcache {

namespace {

constexpr double kSumTolerance = 1e-10;

// Popularity-free shape of one file's objective: the per-file objective is
// q * objective(c) and its derivative q * slope(c).
class FileShape {
 public:
  FileShape(double n_bar, double z) : n_bar_(n_bar), a_(n_bar / z) {
    if (!(n_bar > 0.0) || !(z >= 1.0)) {
      throw std::invalid_argument("n_bar must be > 0 and Z >= 1");
    }
    // slope'(c) = a e^{-n c} (-2 - 2n + (4n + n^2) c - n^2 c^2); its smaller root.
    const double root = ((4.0 + n_bar) - std::sqrt(n_bar * n_bar + 8.0)) / (2.0 * n_bar);
    inflection_ = std::min(root, 1.0);
    slope_min_ = slope(inflection_);
    slope_zero_ = slope(0.0);
    slope_one_ = slope(1.0);
  }

  double objective(double c) const { return c + (1.0 - c) * c * a_ * std::exp(-n_bar_ * c); }

  double slope(double c) const {
    return 1.0 + a_ * std::exp(-n_bar_ * c) * (1.0 - c * (2.0 + n_bar_ - n_bar_ * c));
  }

  double inflection() const { return inflection_; }
  double slope_min() const { return slope_min_; }
  double slope_zero() const { return slope_zero_; }
  double slope_one() const { return slope_one_; }
  bool concave() const { return inflection_ >= 1.0; }

  /// Root of slope(c) = w on the decreasing branch [0, inflection].
  double falling_root(double w) const { return root_on(w, 0.0, inflection_); }

  /// Root of slope(c) = w on the increasing branch [inflection, 1].
  double rising_root(double w) const { return root_on(w, inflection_, 1.0); }

  /// Maximizer of objective(c) - w c over [0, 1].
  double lagrangian_argmax(double w) const {
    if (w >= slope_zero_) return 0.0;
    if (w <= slope_min_) return 1.0;
    const double inner = falling_root(w);
    return objective(1.0) - w >= objective(inner) - w * inner ? 1.0 : inner;
  }

  /// Decreasing-branch value used when enumerating KKT structures; capped at
  /// the inflection point when the multiplier is below the branch.
  double falling_branch(double w) const {
    if (w >= slope_zero_) return 0.0;
    if (w <= slope_min_) return inflection_;
    return falling_root(w);
  }

 private:
  double root_on(double w, double lo, double hi) const {
    double f_lo = slope(lo) - w;
    double f_hi = slope(hi) - w;
    if (f_lo == 0.0) return lo;
    if (f_hi == 0.0) return hi;
    // Multipliers that land on a branch end up to rounding.
    const double slack = 1e-13 * std::max(1.0, std::abs(w));
    if (std::abs(f_lo) <= slack) return lo;
    if (std::abs(f_hi) <= slack) return hi;
    if ((f_lo > 0.0) == (f_hi > 0.0)) {
      std::ostringstream os;
      os.precision(12);
      os << "no root of the marginal gain for scaled multiplier " << w << " on [" << lo << ", "
         << hi << "]";
      throw NumericalError(os.str());
    }
    std::uintmax_t iters = 200;
    auto r = boost::math::tools::toms748_solve([&](double c) { return slope(c) - w; }, lo, hi,
                                               f_lo, f_hi,
                                               boost::math::tools::eps_tolerance<double>(52), iters);
    return 0.5 * (r.first + r.second);
  }

  double n_bar_;
  double a_;
  double inflection_ = 1.0;
  double slope_min_ = 0.0;
  double slope_zero_ = 0.0;
  double slope_one_ = 0.0;
};

double scaled(double v, double q) { return v / q; }

double c_given_v(const FileShape& shape, double v, double q) {
  if (!(q > 0.0)) return v < 0.0 ? 1.0 : 0.0;
  return shape.lagrangian_argmax(scaled(v, q));
}

double objective_of(const FileShape& shape, std::span<const double> w,
                    const std::vector<double>& c) {
  double total = 0.0;
  for (std::size_t m = 0; m < c.size(); ++m) total += w[m] * shape.objective(c[m]);
  return total;
}

struct Candidate {
  std::vector<double> c;
  double v = 0.0;
  double objective = -1.0;
};

// Bisection on a non-increasing sum: the smallest v with sum(v) <= target.
template <class F>
double bisect_decreasing(F&& sum_at, double target, double lo, double hi) {
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (sum_at(mid) > target + kSumTolerance) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

// Solves the KKT system for every admissible structure: the first `top` files
// at 1, optionally file `top` on the increasing (convex) branch, and the rest
// on the decreasing branch at a common multiplier. Optimal caching is
// non-increasing in popularity and at most one file can sit on the convex
// branch, so the best of these is the constrained optimum.
std::optional<Candidate> enumerate_structures(const FileShape& shape, std::span<const double> w,
                                              std::size_t cache_size, double v_hi) {
  const std::size_t n = w.size();
  const double budget = static_cast<double>(cache_size);
  std::optional<Candidate> best;

  auto consider = [&](std::vector<double> c, double v) {
    const double total = std::accumulate(c.begin(), c.end(), 0.0);
    if (std::abs(total - budget) > 1e-9) return;
    const double obj = objective_of(shape, w, c);
    if (!best || obj > best->objective) best = Candidate{std::move(c), v, obj};
  };

  auto fill_tail = [&](std::vector<double>& c, std::size_t from, double v) {
    double s = 0.0;
    for (std::size_t m = from; m < n; ++m) {
      c[m] = w[m] > 0.0 ? shape.falling_branch(scaled(v, w[m])) : 0.0;
      s += c[m];
    }
    return s;
  };

  for (std::size_t top = 0; top <= std::min(cache_size, n); ++top) {
    const double rest = budget - static_cast<double>(top);
    std::vector<double> c(n, 0.0);
    std::fill_n(c.begin(), top, 1.0);

    if (rest <= 0.0) {
      const double v = top < n ? w[top] * shape.slope_zero() : 0.0;
      consider(c, v);
      continue;
    }
    if (top == n) continue;

    // All remaining files on the decreasing branch.
    {
      auto tail_sum = [&](double v) {
        std::vector<double> scratch(n);
        return fill_tail(scratch, top, v);
      };
      if (tail_sum(0.0) + 1e-12 >= rest) {
        const double v = bisect_decreasing(tail_sum, rest, 0.0, v_hi);
        fill_tail(c, top, v);
        consider(c, v);
      }
    }

    // File `top` on the increasing branch.
    if (!shape.concave() && w[top] > 0.0) {
      const std::size_t s = top;
      const double v_lo = w[s] * shape.slope_min();
      const double v_up = w[s] * shape.slope_one();
      auto excess = [&](double v) {
        std::vector<double> trial(n, 0.0);
        trial[s] = shape.rising_root(scaled(v, w[s]));
        return trial[s] + fill_tail(trial, s + 1, v) - rest;
      };
      const int scan = 256;
      double prev_v = v_lo;
      double prev_f = excess(v_lo);
      for (int i = 1; i <= scan; ++i) {
        const double v = v_lo + (v_up - v_lo) * i / scan;
        const double f = excess(v);
        if ((prev_f <= 0.0) != (f <= 0.0)) {
          double a = prev_v;
          double b = v;
          double fa = prev_f;
          for (int it = 0; it < 200 && b > a; ++it) {
            const double mid = 0.5 * (a + b);
            if (mid <= a || mid >= b) break;
            const double fm = excess(mid);
            if ((fm <= 0.0) == (fa <= 0.0)) {
              a = mid;
              fa = fm;
            } else {
              b = mid;
            }
          }
          std::vector<double> trial(c);
          trial[s] = shape.rising_root(scaled(b, w[s]));
          fill_tail(trial, s + 1, b);
          consider(std::move(trial), b);
        }
        prev_v = v;
        prev_f = f;
      }
    }
  }
  return best;
}

KktDiagnostics diagnose(const FileShape& shape, std::span<const double> w,
                        const std::vector<double>& c, double v, std::size_t cache_size) {
  KktDiagnostics d;
  d.inflection = shape.inflection();
  d.cases.resize(c.size());
  d.stationarity_residuals.assign(c.size(), 0.0);
  d.sum_residual =
      std::abs(std::accumulate(c.begin(), c.end(), 0.0) - static_cast<double>(cache_size));
  if (!shape.concave()) {
    std::ostringstream os;
    os.precision(6);
    os << "per-file objective is convex for c > " << shape.inflection();
    d.concavity_warnings.push_back(os.str());
  }
  for (std::size_t m = 0; m < c.size(); ++m) {
    if (c[m] >= 1.0) {
      d.cases[m] = FileCase::clamped_one;
    } else if (c[m] <= 0.0) {
      d.cases[m] = FileCase::clamped_zero;
    } else {
      d.cases[m] = FileCase::interior;
      d.stationarity_residuals[m] = std::abs(v - w[m] * shape.slope(c[m]));
      if (c[m] > shape.inflection()) {
        std::ostringstream os;
        os.precision(6);
        os << "file " << m + 1 << " (c = " << c[m] << ") lies in the convex region";
        d.concavity_warnings.push_back(os.str());
      }
    }
  }
  return d;
}

}  // namespace

std::string_view to_string(FileCase c) {
  switch (c) {
    case FileCase::clamped_one:
      return "clamped-1";
    case FileCase::clamped_zero:
      return "clamped-0";
    case FileCase::interior:
      return "interior";
  }
  return "unknown";
}

double marginal_gain(double c, double q, double n_bar, double z) {
  return q + (q * n_bar * std::exp(-c * n_bar) / z) * (1.0 - c * (2.0 + n_bar - n_bar * c));
}

double solve_c_given_v(double v_star, double q, double n_bar, double z) {
  const FileShape shape(n_bar, z);
  return c_given_v(shape, v_star, q);
}

KktSolution solve_p1_weights(std::span<const double> weights, std::size_t cache_size,
                             double n_bar, double z) {
  const std::size_t n = weights.size();
  if (cache_size < 1 || cache_size >= n) {
    throw std::invalid_argument("solve_p1: need 1 <= M < N_f (M = " + std::to_string(cache_size) +
                                ", N_f = " + std::to_string(n) + ")");
  }
  for (std::size_t m = 0; m < n; ++m) {
    if (!(weights[m] >= 0.0)) throw std::invalid_argument("solve_p1: weights must be >= 0");
  }
  const FileShape shape(n_bar, z);
  const double budget = static_cast<double>(cache_size);
  const double w_max = *std::max_element(weights.begin(), weights.end());
  if (!(w_max > 0.0)) throw std::invalid_argument("solve_p1: all weights are zero");

  auto policy_at = [&](double v) {
    std::vector<double> c(n);
    for (std::size_t m = 0; m < n; ++m) c[m] = c_given_v(shape, v, weights[m]);
    return c;
  };
  auto sum_at = [&](double v) {
    double s = 0.0;
    for (std::size_t m = 0; m < n; ++m) s += c_given_v(shape, v, weights[m]);
    return s;
  };

  // Above max_m q_m (1 + n_bar / Z) every file is dropped; at 0 every file is kept.
  const double v_hi = w_max * shape.slope_zero() * (1.0 + 1e-12);
  const double v_star = bisect_decreasing(sum_at, budget, 0.0, v_hi);

  KktSolution out;
  std::vector<double> c = policy_at(v_star);
  double residual = std::abs(std::accumulate(c.begin(), c.end(), 0.0) - budget);
  out.multiplier = v_star;
  bool gap = residual > kSumTolerance;

  if (gap) {
    auto best = enumerate_structures(shape, weights, cache_size, v_hi);
    if (!best) {
      throw NumericalError("solve_p1: no feasible KKT structure found");
    }
    c = std::move(best->c);
    out.multiplier = best->v;
  }

  for (double& x : c) x = std::clamp(x, 0.0, 1.0);
  out.objective = objective_of(shape, weights, c);
  out.diagnostics = diagnose(shape, weights, c, out.multiplier, cache_size);
  out.diagnostics.duality_gap = gap;
  out.policy = CachingPolicy(std::move(c));
  return out;
}

KktSolution solve_p1(const ContentLibrary& library, const NetworkConfig& cfg) {
  return solve_p1_weights(library.popularity(), library.cache_size(), cfg.n_bar, compute_z(cfg));
}

GridSearchResult grid_search_oracle(const ContentLibrary& library, const NetworkConfig& cfg,
                                    double step) {
  const std::size_t n = library.n_files();
  if (n > 6) throw std::invalid_argument("grid_search_oracle: at most 6 files");
  if (!(step > 0.0 && step <= 0.05)) {
    throw std::invalid_argument("grid_search_oracle: step must lie in (0, 0.05]");
  }
  const long units = std::lround(1.0 / step);
  if (std::abs(static_cast<double>(units) * step - 1.0) > 1e-9) {
    throw std::invalid_argument("grid_search_oracle: 1/step must be an integer");
  }
  const long target = static_cast<long>(library.cache_size()) * units;

  // Number of compositions, to keep the enumeration bounded.
  std::vector<double> ways(static_cast<std::size_t>(target) + 1, 0.0);
  ways[0] = 1.0;
  for (std::size_t m = 0; m < n; ++m) {
    std::vector<double> next(ways.size(), 0.0);
    for (long s = 0; s <= target; ++s) {
      for (long k = 0; k <= units && k <= s; ++k) next[static_cast<std::size_t>(s)] += ways[static_cast<std::size_t>(s - k)];
    }
    ways = std::move(next);
  }
  if (ways[static_cast<std::size_t>(target)] > 2e8) {
    throw std::invalid_argument("grid_search_oracle: combinatorial budget exceeded");
  }

  const double z = compute_z(cfg);
  const FileShape shape(cfg.n_bar, z);
  std::vector<std::vector<double>> value(n, std::vector<double>(static_cast<std::size_t>(units) + 1));
  for (std::size_t m = 0; m < n; ++m) {
    for (long k = 0; k <= units; ++k) {
      value[m][static_cast<std::size_t>(k)] =
          library.popularity(m) * shape.objective(static_cast<double>(k) / units);
    }
  }

  GridSearchResult out;
  out.objective = -1.0;
  std::vector<long> level(n, 0);
  std::vector<long> best(n, 0);
  auto recurse = [&](auto&& self, std::size_t m, long left, double acc) -> void {
    if (m + 1 == n) {
      if (left > units) return;
      level[m] = left;
      const double total = acc + value[m][static_cast<std::size_t>(left)];
      ++out.evaluated;
      if (total > out.objective) {
        out.objective = total;
        best = level;
      }
      return;
    }
    const long remaining_capacity = static_cast<long>(n - m - 1) * units;
    for (long k = std::max(0L, left - remaining_capacity); k <= std::min(units, left); ++k) {
      level[m] = k;
      self(self, m + 1, left - k, acc + value[m][static_cast<std::size_t>(k)]);
    }
  };
  recurse(recurse, 0, target, 0.0);

  std::vector<double> c(n);
  for (std::size_t m = 0; m < n; ++m) c[m] = static_cast<double>(best[m]) / units;
  out.policy = CachingPolicy(std::move(c));
  return out;
}

std::vector<ConcavityPoint> concavity_report(double q, double n_bar, double z, int grid_points) {
  if (grid_points < 10) throw std::invalid_argument("concavity_report: need at least 10 points");
  const double h = 1e-5;
  std::vector<ConcavityPoint> out(static_cast<std::size_t>(grid_points));
  for (int i = 0; i < grid_points; ++i) {
    const double c = static_cast<double>(i) / (grid_points - 1);
    const double lo = std::max(0.0, c - h);
    const double hi = std::min(1.0, c + h);
    const double d2 = (marginal_gain(hi, q, n_bar, z) - marginal_gain(lo, q, n_bar, z)) / (hi - lo);
    out[static_cast<std::size_t>(i)] = ConcavityPoint{c, d2, d2 > 0.0};
  }
  return out;
}

}  // namespace d2dcache
