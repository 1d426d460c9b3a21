#include <stdexcept>
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "d2dcache/model.hpp"

using namespace d2dcache;

TEST_CASE("defaults match the evaluation setup") {
  const auto cfg = NetworkConfig::defaults();
  CHECK(cfg.lambda_p == doctest::Approx(40e-6));
  CHECK(cfg.n_bar == 8.0);
  CHECK(cfg.sigma == 50.0);
  CHECK(cfg.alpha == 4.0);
  CHECK(cfg.theta == 1.0);
  CHECK(cfg.rho() == doctest::Approx(1.0));
  CHECK_NOTHROW(validate(cfg));
}

TEST_CASE("network validation names the offending field") {
  auto cfg = NetworkConfig::defaults();
  cfg.alpha = 2.0;
  CHECK_THROWS_WITH_AS(validate(cfg), doctest::Contains("alpha"), std::invalid_argument);
  cfg = NetworkConfig::defaults();
  cfg.sigma = -1.0;
  CHECK_THROWS_WITH_AS(validate(cfg), doctest::Contains("sigma"), std::invalid_argument);
  cfg = NetworkConfig::defaults();
  cfg.lambda_p = std::nan("");
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
}

TEST_CASE("threshold conversions") {
  CHECK(theta_from_db(0.0) == 1.0);
  CHECK(theta_from_db(10.0) == doctest::Approx(10.0));
  CHECK(theta_from_db(-3.0) == doctest::Approx(0.501187233627));
  CHECK(theta_from_rho(1.0) == 1.0);
  CHECK(theta_from_rho(2.0) == 3.0);
  CHECK_THROWS_AS(theta_from_rho(0.0), std::invalid_argument);
}

TEST_CASE("zipf popularity is normalized and ordered") {
  for (double beta : {0.0, 0.5, 1.0, 1.5, 3.0}) {
    for (std::size_t n : {1u, 2u, 5u, 100u, 10000u}) {
      const auto q = zipf_popularity(n, beta);
      REQUIRE(q.size() == n);
      long double total = 0.0L;
      for (double v : q) total += v;
      CHECK(std::abs(static_cast<double>(total) - 1.0) < 1e-12);
      CHECK(std::is_sorted(q.rbegin(), q.rend()));
    }
  }
  // Independent oracle: ratios follow m^-beta.
  const auto q = zipf_popularity(100, 0.5);
  CHECK(q[0] / q[3] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(q[0] / q[99] == doctest::Approx(10.0).epsilon(1e-14));
  // Harmonic sum oracle for beta = 1, N = 4: H_4 = 25/12.
  const auto h = zipf_popularity(4, 1.0);
  CHECK(h[0] == doctest::Approx(12.0 / 25.0).epsilon(1e-15));
}

TEST_CASE("zipf rejects bad input") {
  CHECK_THROWS_AS(zipf_popularity(0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(zipf_popularity(5, -0.1), std::invalid_argument);
}

TEST_CASE("content library shape") {
  ContentLibrary lib(100, 0.5, 5);
  CHECK(lib.n_files() == 100);
  CHECK(lib.cache_size() == 5);
  CHECK(lib.beta() == 0.5);
  CHECK_THROWS_AS(ContentLibrary(5, 0.5, 5), std::invalid_argument);
  CHECK_THROWS_AS(ContentLibrary(5, 0.5, 0), std::invalid_argument);
  CHECK_THROWS_AS(ContentLibrary::from_popularity({0.2, 0.8}, 1), std::invalid_argument);
  CHECK_THROWS_AS(ContentLibrary::from_popularity({0.5, 0.4}, 1), std::invalid_argument);
  CHECK_NOTHROW(ContentLibrary::from_popularity({0.6, 0.4}, 1));
}

TEST_CASE("baseline policies satisfy the placement constraints") {
  for (double beta : {0.0, 0.5, 1.0, 2.0, 4.0}) {
    ContentLibrary lib(50, beta, 7);
    for (const auto& policy : {policy_cpf(lib), policy_zipf_proportional(lib), policy_uniform(lib)}) {
      const auto report = validate_policy(policy, lib);
      CHECK_MESSAGE(report.ok, "beta " << beta);
    }
  }
}

TEST_CASE("zipf-proportional clips heavy files and redistributes") {
  // q = (0.6, 0.3, 0.1), M = 2: 2q = (1.2, 0.6, 0.2) -> file 1 clipped, the
  // remaining unit is split 3:1.
  auto lib = ContentLibrary::from_popularity({0.6, 0.3, 0.1}, 2);
  const auto c = policy_zipf_proportional(lib);
  CHECK(c[0] == 1.0);
  CHECK(c[1] == doctest::Approx(0.75));
  CHECK(c[2] == doctest::Approx(0.25));
}

TEST_CASE("uniform popularity gives c = M / N for zipf-proportional") {
  ContentLibrary lib(100, 0.0, 5);
  const auto c = policy_zipf_proportional(lib);
  for (double v : c.probs()) CHECK(v == doctest::Approx(0.05).epsilon(1e-14));
}

TEST_CASE("policy validation reports each violation") {
  ContentLibrary lib(3, 0.0, 1);
  const auto report = validate_policy(CachingPolicy({1.2, -0.1, 0.0}), lib);
  CHECK_FALSE(report.ok);
  CHECK(report.violations.size() == 3);
  CHECK_THROWS_AS(validate_policy(CachingPolicy({1.0}), lib), std::invalid_argument);
}

TEST_CASE("policy entropy") {
  CHECK(policy_entropy(CachingPolicy({0.5, 0.5, 0.5, 0.5})) == doctest::Approx(std::log(4.0)));
  CHECK(policy_entropy(CachingPolicy({1.0, 0.0, 0.0})) == 0.0);
  CHECK(policy_entropy(CachingPolicy({0.0, 0.0})) == 0.0);
}
