#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "d2dcache/errors.hpp"

namespace d2dcache::detail {

struct QuadratureOutcome {
  double value = 0.0;
  double error = 0.0;
};

/// Adaptive Gauss-Kronrod over consecutive breakpoints. Breakpoints need not be
/// sorted or unique; pieces of zero width are skipped. Throws NumericalError if
/// the accumulated error estimate exceeds ten times max(abs_tol, rel_tol * |I|).
template <class F>
QuadratureOutcome integrate_pieces(F&& f, std::vector<double> breakpoints, double rel_tol,
                                   double abs_tol, const char* what) {
  std::sort(breakpoints.begin(), breakpoints.end());
  breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()), breakpoints.end());
  QuadratureOutcome out;
  double l1 = 0.0;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    const double a = breakpoints[i];
    const double b = breakpoints[i + 1];
    if (!(b > a)) continue;
    double err = 0.0;
    double piece_l1 = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        f, a, b, 20, rel_tol, &err, &piece_l1);
    out.value += v;
    out.error += err;
    l1 += piece_l1;
  }
  const double allowed = 10.0 * std::max(abs_tol, rel_tol * l1);
  if (!std::isfinite(out.value) || out.error > allowed) {
    std::ostringstream os;
    os.precision(6);
    os << what << ": quadrature did not converge (value " << out.value << ", error estimate "
       << out.error << ", allowed " << allowed << ", range [" << breakpoints.front() << ", "
       << breakpoints.back() << "])";
    throw NumericalError(os.str());
  }
  return out;
}

}  // namespace d2dcache::detail
