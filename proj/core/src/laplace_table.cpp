#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <tuple>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include "d2dcache/analytic.hpp"
#include "d2dcache/special_functions.hpp"
#include "interference.hpp"

namespace d2dcache {

namespace {

// Grid in log(tau). Below the grid the ratio is 1 - O(tau^{1/2}); above it the
// ratio has settled to its large-tau limit, so clamping is accurate.
constexpr double kLogTauMin = -16.0 * std::numbers::ln10;
constexpr double kLogTauMax = 12.0 * std::numbers::ln10;
constexpr int kPointsPerDecade = 16;

}  // namespace

struct LaplaceTable::Spline {
  boost::math::interpolators::cardinal_cubic_b_spline<double> curve;
  double floor = 0.0;
};

LaplaceTable::LaplaceTable(double n_bar, double alpha, const QuadratureSpec& quad)
    : n_bar_(n_bar), alpha_(alpha) {
  if (!(n_bar > 0.0)) throw std::invalid_argument("LaplaceTable: n_bar must be > 0");
  const double gamma_product = ppp_gamma_product(alpha);
  quad.validate();

  const int n = 28 * kPointsPerDecade + 1;
  const double step = (kLogTauMax - kLogTauMin) / (n - 1);
  std::vector<double> ratios(static_cast<std::size_t>(n));
  double floor = 1.0;
  for (int i = 0; i < n; ++i) {
    const double tau = std::exp(kLogTauMin + step * i);
    const double excess = detail::interference_excess(tau, 1.0, n_bar, alpha, 0.0, quad);
    const double ppp = n_bar * std::pow(tau, 2.0 / alpha) * gamma_product;
    const double r = std::clamp(1.0 - 2.0 * excess / ppp, 0.0, 1.0);
    ratios[static_cast<std::size_t>(i)] = r;
    floor = std::min(floor, r);
  }
  spline_ = std::make_unique<Spline>(
      Spline{boost::math::interpolators::cardinal_cubic_b_spline<double>(
                 ratios.begin(), ratios.end(), kLogTauMin, step),
             floor});
}

LaplaceTable::~LaplaceTable() = default;

double LaplaceTable::tau_min() const noexcept { return std::exp(kLogTauMin); }
double LaplaceTable::tau_max() const noexcept { return std::exp(kLogTauMax); }

double LaplaceTable::ratio(double tau) const {
  if (!(tau > 0.0)) return 1.0;
  const double x = std::clamp(std::log(tau), kLogTauMin, kLogTauMax);
  // The spline may overshoot marginally near the flat end; the true ratio
  // never exceeds one.
  return std::clamp(spline_->curve(x), spline_->floor, 1.0);
}

double LaplaceTable::log_laplace(double t_gamma, const NetworkConfig& cfg) const {
  if (cfg.n_bar != n_bar_ || cfg.alpha != alpha_) {
    throw std::invalid_argument("LaplaceTable: network n_bar/alpha differ from the table's");
  }
  if (!(t_gamma > 0.0)) return 0.0;
  const double tau = t_gamma / std::pow(cfg.sigma, alpha_);
  const double exponent = std::numbers::pi * cfg.n_bar * cfg.lambda_p *
                          std::pow(t_gamma, 2.0 / alpha_) * ppp_gamma_product(alpha_);
  return -ratio(tau) * exponent;
}

double LaplaceTable::laplace(double t_gamma, const NetworkConfig& cfg) const {
  return std::exp(log_laplace(t_gamma, cfg));
}

std::shared_ptr<const LaplaceTable> shared_laplace_table(double n_bar, double alpha,
                                                         const QuadratureSpec& quad) {
  using Key = std::tuple<double, double, double, double, double>;
  static std::mutex mutex;
  static std::map<Key, std::shared_ptr<const LaplaceTable>> cache;
  const Key key{n_bar, alpha, quad.rel_tol, quad.abs_tol, quad.v_max_sigma_mult};
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  // Built outside the lock; a concurrent duplicate build is harmless.
  auto table = std::make_shared<const LaplaceTable>(n_bar, alpha, quad);
  std::lock_guard lock(mutex);
  return cache.emplace(key, std::move(table)).first->second;
}

}  // namespace d2dcache
