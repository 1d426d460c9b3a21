#pragma once

#include "d2dcache/analytic.hpp"

namespace d2dcache::detail {

double zeta(double v, double t_gamma, double sigma, double alpha, const QuadratureSpec& quad);

/// int_0^inf (x - 1 + e^{-x}) v dv with x = n_bar zeta(v, t). `v_floor` is a
/// lower bound on the truncation radius.
double interference_excess(double t_gamma, double sigma, double n_bar, double alpha,
                           double v_floor, const QuadratureSpec& quad);

/// x - 1 + e^{-x} without cancellation for small x.
double excess_exponential(double x);

}  // namespace d2dcache::detail
