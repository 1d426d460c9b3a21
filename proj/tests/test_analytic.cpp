#include <stdexcept>
#include <doctest.h>

#include <cmath>
#include <numbers>

#include <boost/math/distributions/poisson.hpp>

#include "d2dcache/analytic.hpp"
#include "d2dcache/simulator.hpp"
#include "oracles.hpp"

using namespace d2dcache;

namespace {

NetworkConfig table_one() { return NetworkConfig::defaults(); }

NetworkConfig with(double sigma, double lambda_per_km2) {
  auto cfg = table_one();
  cfg.sigma = sigma;
  cfg.lambda_p = lambda_per_km2 * 1e-6;
  return cfg;
}

}  // namespace

TEST_CASE("Z at the default parameters") {
  const auto cfg = table_one();
  const long double z = oracle::z_alpha4(cfg.sigma, cfg.lambda_p, cfg.n_bar, cfg.theta);
  CHECK(std::abs(compute_z(cfg) - static_cast<double>(z)) / static_cast<double>(z) < 1e-12);
  // Reported value 16.7913 (4 decimals).
  CHECK(compute_z(cfg) == doctest::Approx(16.7913).epsilon(1e-5));
}

TEST_CASE("single-caterer coverage under the PPP bound equals 1/Z") {
  QuadratureSpec quad;
  for (auto cfg : {table_one(), with(10, 10), with(100, 40)}) {
    const double z = compute_z(cfg);
    const double lib = coverage_given_k(1, cfg, quad, [&](double t) { return laplace_ppp_bound(t, cfg); });
    // Independent oracle: Simpson over the Rayleigh(sqrt(2) sigma) distance.
    const double s = cfg.sigma;
    const double ref = oracle::simpson(
        [&](double h) {
          return h / (2 * s * s) * std::exp(-h * h / (4 * s * s)) *
                 laplace_ppp_bound(cfg.theta * std::pow(h, cfg.alpha), cfg);
        },
        0.0, 40.0 * s, 20000);
    CHECK(lib == doctest::Approx(1.0 / z).epsilon(1e-9));
    CHECK(ref == doctest::Approx(1.0 / z).epsilon(1e-9));
  }
}

TEST_CASE("Laplace transform: PPP bound never exceeds the exact transform") {
  const auto cfg = table_one();
  QuadratureSpec quad;
  const double center = std::pow(cfg.sigma, cfg.alpha);
  for (int i = 0; i < 30; ++i) {
    const double t = center * std::pow(10.0, -3.0 + 6.0 * i / 29.0);
    const double exact = laplace_exact(t, cfg, quad);
    const double bound = laplace_ppp_bound(t, cfg);
    CHECK_MESSAGE(bound <= exact, "t_gamma = " << t);
    CHECK(exact <= 1.0);
  }
}

TEST_CASE("exact Laplace transform against a direct evaluation of the PGFL") {
  const auto cfg = table_one();
  QuadratureSpec quad;
  for (double h : {20.0, 50.0, 150.0}) {
    const double t = cfg.theta * std::pow(h, cfg.alpha);
    const double ref = oracle::log_laplace_tcp(t, cfg.sigma, cfg.lambda_p, cfg.n_bar, cfg.alpha);
    const double got = log_laplace_exact(t, cfg, quad);
    CHECK_MESSAGE(got == doctest::Approx(ref).epsilon(2e-6), "h = " << h);
  }
}

TEST_CASE("exact Laplace transform against simulated interference") {
  // Monte Carlo oracle: E[exp(-t I)] over sampled networks and fading.
  const auto cfg = table_one();
  QuadratureSpec quad;
  const double t = cfg.theta * std::pow(50.0, cfg.alpha);
  const int n = 20000;
  const double r_sim = default_sim_radius(cfg);
  double sum = 0.0;
  double sum_sq = 0.0;
  TcpRealization net;
  for (int i = 0; i < n; ++i) {
    auto rng = trial_rng(77, static_cast<std::uint64_t>(i));
    sample_remote(cfg, r_sim, rng, net);
    const double x = std::exp(-t * sample_interference(net, cfg, rng) / cfg.gamma_d);
    sum += x;
    sum_sq += x * x;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum_sq / n - mean * mean) / n);
  const double exact = laplace_exact(t, cfg, quad);
  MESSAGE("exact " << exact << ", simulated " << mean << " +- " << se);
  CHECK(std::abs(mean - exact) < 4.0 * se);
}

TEST_CASE("Laplace table reproduces direct evaluation") {
  QuadratureSpec quad;
  const auto table = shared_laplace_table(8.0, 4.0, quad);
  for (auto cfg : {table_one(), with(10, 10), with(100, 40)}) {
    for (double h : {1.0, 12.0, 50.0, 200.0, 2000.0}) {
      const double t = cfg.theta * std::pow(h, cfg.alpha);
      // The table interpolates the exponent, so compare log L.
      CHECK(table->laplace(t, cfg) == doctest::Approx(laplace_exact(t, cfg, quad)).epsilon(1e-7));
      CHECK(table->log_laplace(t, cfg) ==
            doctest::Approx(log_laplace_exact(t, cfg, quad)).epsilon(1e-8));
    }
  }
  auto other = table_one();
  other.n_bar = 4.0;
  CHECK_THROWS_AS(table->laplace(1.0, other), std::invalid_argument);
  CHECK(shared_laplace_table(8.0, 4.0, quad) == table);
}

TEST_CASE("coverage of an uncached file is zero") {
  QuadratureSpec quad;
  for (auto m : {CoverageMethod::exact_tcp, CoverageMethod::ppp_bound, CoverageMethod::closed_form_k1}) {
    CHECK(coverage_content(0.0, table_one(), quad, m).value == 0.0);
  }
  CHECK_THROWS_AS(coverage_content(1.5, table_one(), quad, CoverageMethod::ppp_bound),
                  std::invalid_argument);
  CHECK_THROWS_AS(coverage_given_k(0, table_one(), quad, [](double) { return 1.0; }),
                  std::invalid_argument);
}

TEST_CASE("two-caterer coverage: QMC against a tensor Simpson rule") {
  const auto cfg = table_one();
  QuadratureSpec quad;
  auto lap = [&](double t) { return laplace_ppp_bound(t, cfg); };
  const double s = cfg.sigma;
  auto pdf = [s](double h) { return h / (2 * s * s) * std::exp(-h * h / (4 * s * s)); };
  const double ref = oracle::simpson(
      [&](double h1) {
        return pdf(h1) * oracle::simpson(
                             [&](double h2) {
                               const double g = std::pow(h1, -4.0) + std::pow(h2, -4.0);
                               return pdf(h2) * lap(cfg.theta / g);
                             },
                             1e-9, 16 * s, 800);
      },
      1e-9, 16 * s, 800);
  CHECK(coverage_given_k(2, cfg, quad, lap) == doctest::Approx(ref).epsilon(2e-4));
}

TEST_CASE("coverage orderings over the sigma x lambda grid") {
  QuadratureSpec quad;
  double prev_sigma_exact = 2.0;
  for (double sigma : {10.0, 25.0, 50.0, 100.0}) {
    const auto cfg = with(sigma, 40);
    const double exact = coverage_content(1.0, cfg, quad, CoverageMethod::exact_tcp).value;
    const double bound = coverage_content(1.0, cfg, quad, CoverageMethod::ppp_bound).value;
    CHECK(bound <= exact);
    CHECK(exact < prev_sigma_exact);
    prev_sigma_exact = exact;
  }
  double prev_lambda_exact = 2.0;
  for (double lambda : {10.0, 20.0, 40.0}) {
    const double exact = coverage_content(1.0, with(50, lambda), quad, CoverageMethod::exact_tcp).value;
    CHECK(exact < prev_lambda_exact);
    prev_lambda_exact = exact;
  }
}

TEST_CASE("coverage depends on sigma and lambda only through sigma^2 lambda") {
  QuadratureSpec quad;
  const double a = coverage_content(1.0, with(25, 40), quad, CoverageMethod::exact_tcp).value;
  const double b = coverage_content(1.0, with(50, 10), quad, CoverageMethod::exact_tcp).value;
  CHECK(a == doctest::Approx(b).epsilon(1e-9));
}

TEST_CASE("coverage is invariant to the transmit power") {
  QuadratureSpec quad;
  const double ref = coverage_content(0.6, table_one(), quad, CoverageMethod::exact_tcp).value;
  for (double g : {0.1, 10.0}) {
    auto cfg = table_one();
    cfg.gamma_d = g;
    CHECK(coverage_content(0.6, cfg, quad, CoverageMethod::exact_tcp).value ==
          doctest::Approx(ref).epsilon(1e-9));
    CHECK(compute_z(cfg) == doctest::Approx(compute_z(table_one())).epsilon(1e-14));
  }
}

TEST_CASE("exact coverage at the default parameters agrees with an independent prototype") {
  // A separate scipy implementation of the same expression gave 0.4475 at c = 1.
  QuadratureSpec quad;
  CHECK(coverage_content(1.0, table_one(), quad, CoverageMethod::exact_tcp).value ==
        doctest::Approx(0.4475).epsilon(2e-3));
}

TEST_CASE("poisson truncation matches the Poisson CDF") {
  for (double mean : {0.3, 1.0, 8.0, 40.0}) {
    for (double tail : {1e-3, 1e-9}) {
      const int k = poisson_truncation(mean, tail);
      boost::math::poisson_distribution<> p(mean);
      CHECK(boost::math::cdf(boost::math::complement(p, k)) < tail);
      if (k > 0) CHECK(boost::math::cdf(boost::math::complement(p, k - 1)) >= tail * 0.999999);
    }
  }
  CHECK(poisson_truncation(0.0, 1e-9) == 0);
}

TEST_CASE("offloading gain assembly") {
  ContentLibrary lib(4, 1.0, 2);
  CachingPolicy policy({0.9, 0.6, 0.3, 0.2});
  const auto q = lib.popularity();
  CHECK(offloading_gain(policy, lib, [](double) { return 0.0; }) ==
        doctest::Approx(q[0] * 0.9 + q[1] * 0.6 + q[2] * 0.3 + q[3] * 0.2));
  const auto cfg = table_one();
  const double z = compute_z(cfg);
  double manual = 0.0;
  for (std::size_t m = 0; m < 4; ++m) {
    const double c = policy[m];
    manual += q[m] * (c + (1 - c) * c * 8.0 * std::exp(-8.0 * c) / z);
  }
  CHECK(offloading_closed_form_k1(policy, lib, cfg) == doctest::Approx(manual).epsilon(1e-14));
  CHECK_THROWS_AS(offloading_gain(CachingPolicy({1.0}), lib, [](double) { return 0.0; }),
                  std::invalid_argument);
}

TEST_CASE("quadrature settings are validated") {
  QuadratureSpec quad;
  quad.rel_tol = 0.0;
  CHECK_THROWS_AS(quad.validate(), std::invalid_argument);
  quad = {};
  quad.mc_integration_samples = 10;
  CHECK_THROWS_AS(quad.validate(), std::invalid_argument);
}
