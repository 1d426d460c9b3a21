#pragma once

// Reference computations for the tests. They use plain composite rules and
// textbook formulas so they share no code with the library.

#include <cmath>
#include <functional>
#include <numbers>

namespace oracle {

inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

/// E[t / (|x|^alpha + t)] for x ~ N(v e1, sigma^2 I), as a polar integral
/// around the origin with the angular Bessel integral done explicitly.
inline double zeta(double v, double t, double sigma, double alpha) {
  const double s2 = sigma * sigma;
  const double lo = std::max(0.0, v - 11.0 * sigma);
  const double hi = v + 11.0 * sigma;
  auto radial = [&](double u) {
    const double z = u * v / s2;
    // e^{-z} I0(z): (1/pi) int_0^pi exp(z (cos phi - 1)) dphi for small z, where
    // the peak at phi = 0 is resolved; the Hankel asymptotic series otherwise.
    double i0s = 0.0;
    if (z < 40.0) {
      i0s = simpson([z](double p) { return std::exp(z * (std::cos(p) - 1.0)); }, 0.0,
                    std::numbers::pi, 400) / std::numbers::pi;
    } else {
      double term = 1.0;
      double sum = 1.0;
      for (int k = 1; k < 12; ++k) {
        term *= (2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * k * z);
        sum += term;
      }
      i0s = sum / std::sqrt(2.0 * std::numbers::pi * z);
    }
    const double rice = u / s2 * std::exp(-(u - v) * (u - v) / (2 * s2)) * i0s;
    return t / (std::pow(u, alpha) + t) * rice;
  };
  return simpson(radial, lo, hi, 400);
}

/// log of exp(-2 pi lambda int_0^inf (1 - e^{-n zeta(v)}) v dv), integrated
/// directly to V = 60 sigma plus the leading far-field tail
/// 2 pi lambda n t int_V^inf v^{1-alpha} (1 + alpha^2 sigma^2 / (2 v^2)) dv.
inline double log_laplace_tcp(double t, double sigma, double lambda, double n_bar, double alpha) {
  const double v_max = 60.0 * sigma + 10.0 * std::pow(t, 1.0 / alpha);
  auto integrand = [&](double v) { return -std::expm1(-n_bar * zeta(v, t, sigma, alpha)) * v; };
  double body = simpson(integrand, 0.0, 4.0 * sigma, 120);
  body += simpson(integrand, 4.0 * sigma, v_max, 600);
  const double tail = n_bar * t *
                      (std::pow(v_max, 2.0 - alpha) / (alpha - 2.0) +
                       alpha * alpha * sigma * sigma / 2.0 * std::pow(v_max, -alpha) / alpha);
  return -2.0 * std::numbers::pi * lambda * (body + tail);
}

/// Z = 4 sigma^2 pi n lambda sqrt(theta) Gamma(3/2) Gamma(1/2) + 1 for alpha = 4,
/// using Gamma(3/2) Gamma(1/2) = pi / 2, in long double.
inline long double z_alpha4(long double sigma, long double lambda, long double n_bar,
                            long double theta) {
  const long double pi = 3.141592653589793238462643383279502884L;
  return 4.0L * sigma * sigma * pi * n_bar * lambda * std::sqrt(theta) * pi / 2.0L + 1.0L;
}

}  // namespace oracle
