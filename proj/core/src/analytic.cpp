#include "d2dcache/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include <boost/random/sobol.hpp>

#include "d2dcache/errors.hpp"
#include "d2dcache/special_functions.hpp"
#include "interference.hpp"
#include "quadrature.hpp"

namespace d2dcache {

namespace {

constexpr double kPi = std::numbers::pi;

// Half-width, in units of sigma, outside which a Gaussian offset has
// negligible mass (e^{-k^2/2} well below any tolerance we accept).
constexpr double kGaussianSpan = 12.0;

double kernel(double u, double t_gamma, double alpha) {
  // t / (u^a + t) written to stay finite for huge or tiny t.
  return 1.0 / (1.0 + std::pow(u, alpha) / t_gamma);
}

double ppp_exponent(double t_gamma, const NetworkConfig& cfg) {
  return kPi * cfg.n_bar * cfg.lambda_p * std::pow(t_gamma, 2.0 / cfg.alpha) *
         ppp_gamma_product(cfg.alpha);
}

void require_t_gamma(double t_gamma, const char* what) {
  if (!(t_gamma > 0.0) || !std::isfinite(t_gamma)) {
    throw std::invalid_argument(std::string(what) + ": t_gamma must be finite and > 0");
  }
}

// Deterministic uniform in [0, 1) from a 64-bit word.
double to_unit(std::uint64_t x) { return static_cast<double>(x >> 11) * 0x1.0p-53; }

// Randomly shifted Sobol points in [0,1)^dim. The shift vector depends only on
// the seed and coordinate index, so the first k coordinates of a higher
// dimensional rule coincide with the k-dimensional rule.
class ShiftedSobol {
 public:
  ShiftedSobol(std::size_t dim, std::uint64_t seed) : engine_(dim), shift_(dim) {
    std::mt19937_64 rng(seed);
    for (double& s : shift_) s = to_unit(rng());
  }

  void next(std::span<double> out) {
    for (std::size_t j = 0; j < out.size(); ++j) {
      double u = to_unit(engine_()) + shift_[j];
      if (u >= 1.0) u -= 1.0;
      out[j] = u;
    }
  }

 private:
  boost::random::sobol engine_;
  std::vector<double> shift_;
};

// Rayleigh(sqrt(2) sigma) inverse CDF in units of sigma: h^2 = -4 sigma^2 ln(1 - u).
double serving_distance(double u, double sigma) { return sigma * std::sqrt(-4.0 * std::log1p(-u)); }

struct QmcSums {
  std::vector<double> mean;
  std::vector<double> std_error;
};

// E[L(theta / sum_{i<=k} h_i^{-alpha})] for every k = 2..max_k in one pass.
QmcSums qmc_given_k(int max_k, const NetworkConfig& cfg, const QuadratureSpec& quad,
                    const LaplaceFn& laplace) {
  QmcSums out;
  out.mean.assign(static_cast<std::size_t>(max_k) + 1, 0.0);
  out.std_error.assign(out.mean.size(), 0.0);
  if (max_k < 2) return out;
  std::vector<double> sum_sq(out.mean.size(), 0.0);
  ShiftedSobol sobol(static_cast<std::size_t>(max_k), quad.qmc_seed);
  std::vector<double> u(static_cast<std::size_t>(max_k));
  const std::size_t n = quad.mc_integration_samples;
  for (std::size_t p = 0; p < n; ++p) {
    sobol.next(u);
    double s = 0.0;
    for (int k = 1; k <= max_k; ++k) {
      const double h = serving_distance(u[static_cast<std::size_t>(k - 1)], cfg.sigma);
      s += std::pow(h, -cfg.alpha);
      if (k < 2) continue;
      const double t_gamma = cfg.theta / s;
      const double value = t_gamma > 0.0 ? laplace(t_gamma) : 1.0;
      out.mean[static_cast<std::size_t>(k)] += value;
      sum_sq[static_cast<std::size_t>(k)] += value * value;
    }
  }
  const double dn = static_cast<double>(n);
  for (int k = 2; k <= max_k; ++k) {
    const auto i = static_cast<std::size_t>(k);
    out.mean[i] /= dn;
    const double var = std::max(0.0, sum_sq[i] / dn - out.mean[i] * out.mean[i]);
    out.std_error[i] = std::sqrt(var / dn);
  }
  return out;
}

detail::QuadratureOutcome quadrature_given_one(const NetworkConfig& cfg, const QuadratureSpec& quad,
                                               const LaplaceFn& laplace) {
  const double s2 = cfg.sigma * cfg.sigma;
  auto integrand = [&](double h) {
    if (h <= 0.0) return 0.0;
    const double pdf = h / (2.0 * s2) * std::exp(-h * h / (4.0 * s2));
    return laplace(cfg.theta * std::pow(h, cfg.alpha)) * pdf;
  };
  const double h_max = 2.0 * cfg.sigma * std::sqrt(std::log(1.0 / quad.abs_tol) + 10.0);
  std::vector<double> breaks{0.0, 0.5 * cfg.sigma, cfg.sigma, 2.0 * cfg.sigma, 4.0 * cfg.sigma,
                             8.0 * cfg.sigma, h_max};
  // Scale where the PPP exponent reaches one.
  const double h_interf =
      1.0 / std::sqrt(kPi * cfg.n_bar * cfg.lambda_p * ppp_gamma_product(cfg.alpha) *
                      std::pow(cfg.theta, 2.0 / cfg.alpha));
  if (h_interf < h_max) breaks.push_back(h_interf);
  return detail::integrate_pieces(integrand, breaks, quad.rel_tol, quad.abs_tol,
                                  "coverage_given_k(k=1)");
}

void require_probability(double c, const char* what) {
  if (!(c >= 0.0 && c <= 1.0)) {
    std::ostringstream os;
    os << what << ": caching probability " << c << " outside [0, 1]";
    throw std::invalid_argument(os.str());
  }
}

}  // namespace

void QuadratureSpec::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw std::invalid_argument("tolerances must be > 0");
  if (!(v_max_sigma_mult > 0.0)) throw std::invalid_argument("v_max_sigma_mult must be > 0");
  if (!(k_max_tail_mass > 0.0 && k_max_tail_mass < 1.0)) {
    throw std::invalid_argument("k_max_tail_mass must lie in (0, 1)");
  }
  if (mc_integration_samples < 1000) {
    throw std::invalid_argument("mc_integration_samples must be >= 1000");
  }
}

std::string_view to_string(CoverageMethod method) {
  switch (method) {
    case CoverageMethod::exact_tcp:
      return "exact-tcp";
    case CoverageMethod::ppp_bound:
      return "ppp-bound";
    case CoverageMethod::closed_form_k1:
      return "closed-form-k1";
  }
  return "unknown";
}

namespace detail {

double excess_exponential(double x) {
  if (x < 1e-3) {
    // x^2/2 - x^3/6 + x^4/24 - x^5/120
    return x * x * (0.5 - x * (1.0 / 6.0 - x * (1.0 / 24.0 - x / 120.0)));
  }
  return x + std::expm1(-x);
}

double zeta(double v, double t_gamma, double sigma, double alpha, const QuadratureSpec& quad) {
  const double lo = std::max(0.0, v - kGaussianSpan * sigma);
  const double hi = v + kGaussianSpan * sigma;
  const double u_half = std::pow(t_gamma, 1.0 / alpha);  // kernel equals 1/2 here
  std::vector<double> breaks{lo, hi};
  if (v > lo) breaks.push_back(v);
  if (sigma + lo < hi) breaks.push_back(lo + sigma);
  if (u_half > lo && u_half < hi) breaks.push_back(u_half);
  auto integrand = [&](double u) { return kernel(u, t_gamma, alpha) * rician_pdf(u, v, sigma); };
  const auto r = integrate_pieces(integrand, std::move(breaks), quad.rel_tol,
                                  quad.abs_tol * 1e-6, "zeta_kernel");
  return std::clamp(r.value, 0.0, 1.0);
}

double interference_excess(double t_gamma, double sigma, double n_bar, double alpha,
                           double v_floor, const QuadratureSpec& quad) {
  const double u_half = std::pow(t_gamma, 1.0 / alpha);
  const double scale = std::max(sigma, u_half);
  const double v_max = std::max(v_floor, quad.v_max_sigma_mult * scale + 10.0 * sigma);

  std::vector<double> breaks{0.0, sigma, v_max};
  for (double w = scale; w < v_max; w *= 2.0) breaks.push_back(w);
  for (double off : {-4.0, -1.0, 0.0, 1.0, 4.0}) {
    const double b = u_half + off * sigma;
    if (b > 0.0 && b < v_max) breaks.push_back(b);
  }
  auto integrand = [&](double v) {
    return excess_exponential(n_bar * zeta(v, t_gamma, sigma, alpha, quad)) * v;
  };
  // The result is compared against the PPP exponent (~ n_bar u_half^2), so the
  // absolute tolerance scales with it.
  const double abs_tol = quad.abs_tol * std::max(n_bar * u_half * u_half, 1e-300);
  const auto r = integrate_pieces(integrand, std::move(breaks), quad.rel_tol, abs_tol,
                                  "laplace_exact outer integral");
  // Far field: zeta ~ t / v^alpha, so the integrand ~ (n_bar t)^2 v^{1-2 alpha} / 2.
  const double nt = n_bar * t_gamma;
  const double tail = 0.5 * nt * nt * std::pow(v_max, 2.0 - 2.0 * alpha) / (2.0 * alpha - 2.0);
  return r.value + tail;
}

}  // namespace detail

double zeta_kernel(double v, double t_gamma, const NetworkConfig& cfg, const QuadratureSpec& quad) {
  validate(cfg);
  if (!(v >= 0.0)) throw std::invalid_argument("zeta_kernel: v must be >= 0");
  require_t_gamma(t_gamma, "zeta_kernel");
  return detail::zeta(v, t_gamma, cfg.sigma, cfg.alpha, quad);
}

double log_laplace_exact(double t_gamma, const NetworkConfig& cfg, const QuadratureSpec& quad) {
  validate(cfg);
  require_t_gamma(t_gamma, "laplace_exact");
  const double v_floor = 10.0 * cfg.sigma + 5.0 / std::sqrt(kPi * cfg.lambda_p);
  const double excess =
      detail::interference_excess(t_gamma, cfg.sigma, cfg.n_bar, cfg.alpha, v_floor, quad);
  const double log_l = -ppp_exponent(t_gamma, cfg) + 2.0 * kPi * cfg.lambda_p * excess;
  return std::min(log_l, 0.0);
}

double laplace_exact(double t_gamma, const NetworkConfig& cfg, const QuadratureSpec& quad) {
  return std::exp(log_laplace_exact(t_gamma, cfg, quad));
}

double laplace_ppp_bound(double t_gamma, const NetworkConfig& cfg) {
  validate(cfg);
  if (t_gamma == 0.0) return 1.0;
  require_t_gamma(t_gamma, "laplace_ppp_bound");
  return std::exp(-ppp_exponent(t_gamma, cfg));
}

double compute_z(const NetworkConfig& cfg) {
  validate(cfg);
  return 4.0 * cfg.sigma * cfg.sigma * ppp_exponent(cfg.theta, cfg) + 1.0;
}

double coverage_given_k(int k, const NetworkConfig& cfg, const QuadratureSpec& quad,
                        const LaplaceFn& laplace) {
  validate(cfg);
  quad.validate();
  if (k < 1) throw std::invalid_argument("coverage_given_k: k must be >= 1");
  if (k == 1) return quadrature_given_one(cfg, quad, laplace).value;
  return qmc_given_k(k, cfg, quad, laplace).mean[static_cast<std::size_t>(k)];
}

int poisson_truncation(double mean, double tail_mass) {
  if (!(mean >= 0.0)) throw std::invalid_argument("poisson_truncation: mean must be >= 0");
  if (mean == 0.0) return 0;
  double pmf = std::exp(-mean);
  double cdf = pmf;
  int k = 0;
  while (1.0 - cdf >= tail_mass) {
    ++k;
    pmf *= mean / k;
    cdf += pmf;
    if (k > 100000) throw NumericalError("poisson_truncation: runaway cutoff");
  }
  return k;
}

CoverageEvaluator::CoverageEvaluator(const NetworkConfig& cfg, const QuadratureSpec& quad,
                                     CoverageMethod method)
    : cfg_(cfg), quad_(quad), method_(method) {
  validate(cfg_);
  quad_.validate();
  z_ = compute_z(cfg_);
  const int k_cap = std::max(1, poisson_truncation(cfg_.n_bar, quad_.k_max_tail_mass));
  given_k_.assign(static_cast<std::size_t>(k_cap), 0.0);
  given_k_error_.assign(given_k_.size(), 0.0);

  if (method_ == CoverageMethod::closed_form_k1) {
    given_k_[0] = 1.0 / z_;
    return;
  }

  LaplaceFn laplace;
  if (method_ == CoverageMethod::ppp_bound) {
    const double coef = kPi * cfg_.n_bar * cfg_.lambda_p * ppp_gamma_product(cfg_.alpha);
    const double delta = 2.0 / cfg_.alpha;
    laplace = [coef, delta](double t_gamma) { return std::exp(-coef * std::pow(t_gamma, delta)); };
  } else {
    auto table = shared_laplace_table(cfg_.n_bar, cfg_.alpha, quad_);
    const NetworkConfig local = cfg_;
    laplace = [table, local](double t_gamma) { return table->laplace(t_gamma, local); };
  }

  const auto one = quadrature_given_one(cfg_, quad_, laplace);
  given_k_[0] = one.value;
  given_k_error_[0] = one.error;
  const auto many = qmc_given_k(k_cap, cfg_, quad_, laplace);
  for (int k = 2; k <= k_cap; ++k) {
    given_k_[static_cast<std::size_t>(k - 1)] = many.mean[static_cast<std::size_t>(k)];
    given_k_error_[static_cast<std::size_t>(k - 1)] = many.std_error[static_cast<std::size_t>(k)];
  }
}

double CoverageEvaluator::given_k(int k) const {
  if (k < 1 || k > max_k()) throw std::out_of_range("CoverageEvaluator::given_k");
  return given_k_[static_cast<std::size_t>(k - 1)];
}

CoverageResult CoverageEvaluator::operator()(double c) const {
  require_probability(c, "coverage_content");
  CoverageResult out;
  out.method = method_;
  if (c == 0.0) return out;
  const double mean = c * cfg_.n_bar;
  if (method_ == CoverageMethod::closed_form_k1) {
    out.value = mean * std::exp(-mean) / z_;
    return out;
  }
  const int k_max = std::min(max_k(), std::max(1, poisson_truncation(mean, quad_.k_max_tail_mass)));
  double pmf = std::exp(-mean);
  double mass = pmf;
  for (int k = 1; k <= k_max; ++k) {
    pmf *= mean / k;
    mass += pmf;
    out.value += pmf * given_k_[static_cast<std::size_t>(k - 1)];
    out.error_estimate += pmf * given_k_error_[static_cast<std::size_t>(k - 1)];
  }
  out.error_estimate += std::max(0.0, 1.0 - mass);
  out.value = std::clamp(out.value, 0.0, 1.0);
  return out;
}

CoverageResult coverage_content(double c, const NetworkConfig& cfg, const QuadratureSpec& quad,
                                CoverageMethod method) {
  require_probability(c, "coverage_content");
  if (c == 0.0) return CoverageResult{0.0, method, 0.0};
  return CoverageEvaluator(cfg, quad, method)(c);
}

double offloading_gain(const CachingPolicy& policy, const ContentLibrary& library,
                       const std::function<double(double)>& coverage) {
  if (policy.size() != library.n_files()) {
    throw std::invalid_argument("offloading_gain: policy and library sizes differ");
  }
  double total = 0.0;
  for (std::size_t m = 0; m < policy.size(); ++m) {
    const double c = policy[m];
    const double d2d = c < 1.0 ? coverage(c) : 0.0;
    total += library.popularity(m) * (c + (1.0 - c) * d2d);
  }
  return total;
}

double offloading_closed_form_k1(const CachingPolicy& policy, const ContentLibrary& library,
                                 const NetworkConfig& cfg) {
  const double z = compute_z(cfg);
  const double n_bar = cfg.n_bar;
  return offloading_gain(policy, library, [z, n_bar](double c) {
    const double mean = c * n_bar;
    return mean * std::exp(-mean) / z;
  });
}

}  // namespace d2dcache
