#include <stdexcept>
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "d2dcache/special_functions.hpp"

using namespace d2dcache;

TEST_CASE("gamma function against known values") {
  CHECK(gamma_function(1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(gamma_function(0.5) == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-14));
  CHECK(gamma_function(1.5) == doctest::Approx(std::sqrt(std::numbers::pi) / 2).epsilon(1e-14));
  CHECK(gamma_function(5.0) == doctest::Approx(24.0).epsilon(1e-14));
  CHECK(gamma_function(-0.5) == doctest::Approx(-2.0 * std::sqrt(std::numbers::pi)).epsilon(1e-14));
  CHECK_THROWS_AS(gamma_function(0.0), std::domain_error);
  CHECK_THROWS_AS(gamma_function(-2.0), std::domain_error);
}

TEST_CASE("scaled Bessel I0 against the integral representation") {
  // e^{-x} I0(x) = (1/pi) int_0^pi exp(x (cos t - 1)) dt, by composite Simpson.
  auto oracle = [](double x) {
    const int n = 4000;
    const double h = std::numbers::pi / n;
    double s = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      s += w * std::exp(x * (std::cos(i * h) - 1.0));
    }
    return s * h / 3.0 / std::numbers::pi;
  };
  for (double x : {0.0, 1e-3, 0.5, 3.0, 10.0, 19.9, 20.1, 50.0, 300.0, 5000.0}) {
    CHECK_MESSAGE(bessel_i0_scaled(x) == doctest::Approx(oracle(x)).epsilon(1e-11), "x = " << x);
  }
  // Large-x leading asymptote.
  const double x = 1e6;
  CHECK(bessel_i0_scaled(x) == doctest::Approx(1.0 / std::sqrt(2 * std::numbers::pi * x)).epsilon(1e-6));
}

TEST_CASE("rician density integrates to one and reduces to Rayleigh") {
  const double sigma = 50.0;
  for (double v : {0.0, 10.0, 80.0, 400.0, 3000.0}) {
    const double lo = std::max(0.0, v - 14 * sigma);
    const double hi = v + 14 * sigma;
    const int n = 20000;
    const double h = (hi - lo) / n;
    double s = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      s += w * rician_pdf(lo + i * h, v, sigma);
    }
    CHECK_MESSAGE(s * h / 3.0 == doctest::Approx(1.0).epsilon(1e-9), "v = " << v);
  }
  for (double u : {1.0, 30.0, 120.0}) {
    const double rayleigh = u / (sigma * sigma) * std::exp(-u * u / (2 * sigma * sigma));
    CHECK(rician_pdf(u, 0.0, sigma) == doctest::Approx(rayleigh).epsilon(1e-14));
  }
  CHECK_THROWS(rician_pdf(1.0, 1.0, 0.0));
}

TEST_CASE("PPP gamma product") {
  CHECK(ppp_gamma_product(4.0) == doctest::Approx(std::numbers::pi / 2).epsilon(1e-14));
  // Gamma(1+d) Gamma(1-d) = pi d / sin(pi d), d = 2 / alpha.
  for (double alpha : {2.5, 3.0, 3.7, 6.0}) {
    const double d = 2.0 / alpha;
    CHECK(ppp_gamma_product(alpha) ==
          doctest::Approx(std::numbers::pi * d / std::sin(std::numbers::pi * d)).epsilon(1e-13));
  }
  CHECK_THROWS_AS(ppp_gamma_product(2.0), std::domain_error);
}
