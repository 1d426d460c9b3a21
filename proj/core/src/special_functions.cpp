#include "d2dcache/special_functions.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace d2dcache {

double gamma_function(double x) {
  if (std::isnan(x)) throw std::domain_error("gamma_function: NaN argument");
  if (x <= 0.0 && std::floor(x) == x) {
    throw std::domain_error("gamma_function: pole at " + std::to_string(x));
  }
  return std::tgamma(x);
}

double bessel_i0_scaled(double x) {
  if (!(x >= 0.0)) throw std::invalid_argument("bessel_i0_scaled: argument must be >= 0");
  if (x < 20.0) {
    // sum_k ((x/2)^{2k} / (k!)^2); all terms positive, converges fast.
    const double y = 0.25 * x * x;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 200; ++k) {
      term *= y / (static_cast<double>(k) * static_cast<double>(k));
      sum += term;
      if (term < sum * 1e-17) break;
    }
    return sum * std::exp(-x);
  }
  // e^{-x} I0(x) ~ (2 pi x)^{-1/2} sum_k a_k, a_k = a_{k-1} (2k-1)^2 / (8 k x).
  // The smallest term is reached near k = 2x, well past double precision.
  const double inv8x = 1.0 / (8.0 * x);
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 60; ++k) {
    const double next = term * (2.0 * k - 1.0) * (2.0 * k - 1.0) * inv8x / k;
    if (next > term) break;
    term = next;
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum / std::sqrt(2.0 * std::numbers::pi * x);
}

double rician_pdf(double u, double v, double sigma) {
  if (!(u >= 0.0) || !(v >= 0.0) || !(sigma > 0.0)) {
    throw std::invalid_argument("rician_pdf: need u >= 0, v >= 0, sigma > 0");
  }
  const double s2 = sigma * sigma;
  const double d = u - v;
  // exp(-(u^2+v^2)/2s^2) I0(uv/s^2) = exp(-(u-v)^2/2s^2) * [e^{-uv/s^2} I0(uv/s^2)]
  return (u / s2) * std::exp(-d * d / (2.0 * s2)) * bessel_i0_scaled(u * v / s2);
}

double ppp_gamma_product(double alpha) {
  if (!(alpha > 2.0)) {
    throw std::domain_error("path-loss exponent must exceed 2 (got " + std::to_string(alpha) + ")");
  }
  const double delta = 2.0 / alpha;
  return gamma_function(1.0 + delta) * gamma_function(1.0 - delta);
}

}  // namespace d2dcache
