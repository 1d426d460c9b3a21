#pragma once

namespace d2dcache {

/// Euler gamma function. Throws std::domain_error at the poles
/// (zero and negative integers).
double gamma_function(double x);

/// Exponentially scaled modified Bessel function of the first kind, order 0:
/// e^{-x} I0(x) for x >= 0. Power series below x = 20, asymptotic expansion
/// above; never overflows.
double bessel_i0_scaled(double x);

/// Rician density of the distance u between the origin and a point drawn from
/// an isotropic 2-D Gaussian (std-dev `sigma` per axis) centered at distance v.
/// Reduces to the Rayleigh density when v = 0.
double rician_pdf(double u, double v, double sigma);

/// Gamma(1 + 2/alpha) * Gamma(1 - 2/alpha), the constant of the PPP
/// interference Laplace transform. Requires alpha > 2.
double ppp_gamma_product(double alpha);

}  // namespace d2dcache
