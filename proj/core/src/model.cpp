#include "d2dcache/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace d2dcache {

namespace {

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    std::ostringstream os;
    os << "NetworkConfig." << name << " must be finite and > 0 (got " << value << ")";
    throw std::invalid_argument(os.str());
  }
}

void validate_library_shape(std::size_t n_files, std::size_t cache_size) {
  if (n_files == 0) throw std::invalid_argument("library needs at least one file");
  if (cache_size < 1) throw std::invalid_argument("cache size must be at least 1");
  if (cache_size >= n_files) {
    throw std::invalid_argument("cache size " + std::to_string(cache_size) +
                                " must be smaller than the library size " +
                                std::to_string(n_files));
  }
}

}  // namespace

double NetworkConfig::rho() const { return std::log2(1.0 + theta); }

void validate(const NetworkConfig& cfg) {
  require_positive(cfg.lambda_p, "lambda_p");
  require_positive(cfg.n_bar, "n_bar");
  require_positive(cfg.sigma, "sigma");
  require_positive(cfg.gamma_d, "gamma_d");
  require_positive(cfg.theta, "theta");
  if (!(cfg.alpha > 2.0) || !std::isfinite(cfg.alpha)) {
    throw std::invalid_argument("NetworkConfig.alpha must be > 2 (got " +
                                std::to_string(cfg.alpha) + ")");
  }
}

double theta_from_rho(double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("rate threshold rho must be > 0");
  return std::exp2(rho) - 1.0;
}

double theta_from_db(double db) { return std::pow(10.0, db / 10.0); }

std::vector<double> zipf_popularity(std::size_t n_files, double beta) {
  if (n_files == 0) throw std::invalid_argument("zipf_popularity: n_files must be >= 1");
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("zipf_popularity: beta must be finite and >= 0");
  }
  std::vector<double> q(n_files);
  for (std::size_t m = 0; m < n_files; ++m) {
    q[m] = std::pow(static_cast<double>(m + 1), -beta);
  }
  // Summing smallest-first keeps the normalization error at a few ulps.
  double norm = 0.0;
  for (auto it = q.rbegin(); it != q.rend(); ++it) norm += *it;
  for (double& v : q) v /= norm;
  return q;
}

ContentLibrary::ContentLibrary(std::size_t n_files, double beta, std::size_t cache_size)
    : ContentLibrary(zipf_popularity(n_files, beta), cache_size, beta) {}

ContentLibrary::ContentLibrary(std::vector<double> popularity, std::size_t cache_size,
                               double beta)
    : popularity_(std::move(popularity)), cache_size_(cache_size), beta_(beta) {
  validate_library_shape(popularity_.size(), cache_size_);
}

ContentLibrary ContentLibrary::from_popularity(std::vector<double> popularity,
                                               std::size_t cache_size, double beta) {
  double total = 0.0;
  for (std::size_t m = 0; m < popularity.size(); ++m) {
    if (!(popularity[m] >= 0.0)) throw std::invalid_argument("popularity entries must be >= 0");
    if (m > 0 && popularity[m] > popularity[m - 1]) {
      throw std::invalid_argument("popularity must be non-increasing in the file index");
    }
    total += popularity[m];
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("popularity must sum to 1");
  }
  return ContentLibrary(std::move(popularity), cache_size, beta);
}

double CachingPolicy::sum() const { return std::accumulate(probs_.begin(), probs_.end(), 0.0); }

PolicyReport validate_policy(const CachingPolicy& policy, const ContentLibrary& library) {
  if (policy.size() != library.n_files()) {
    throw std::invalid_argument("policy has " + std::to_string(policy.size()) +
                                " entries, library has " + std::to_string(library.n_files()));
  }
  PolicyReport report;
  for (std::size_t m = 0; m < policy.size(); ++m) {
    const double c = policy[m];
    if (!(c >= 0.0 && c <= 1.0)) {
      std::ostringstream os;
      os << "c[" << m + 1 << "] = " << c << " outside [0, 1]";
      report.violations.push_back(os.str());
    }
  }
  const double target = static_cast<double>(library.cache_size());
  const double total = policy.sum();
  if (!(std::abs(total - target) <= kPolicySumTolerance)) {
    std::ostringstream os;
    os.precision(12);
    os << "sum(c) = " << total << " differs from cache size " << target;
    report.violations.push_back(os.str());
  }
  report.ok = report.violations.empty();
  return report;
}

CachingPolicy policy_cpf(const ContentLibrary& library) {
  std::vector<double> c(library.n_files(), 0.0);
  std::fill_n(c.begin(), library.cache_size(), 1.0);
  return CachingPolicy(std::move(c));
}

CachingPolicy policy_zipf_proportional(const ContentLibrary& library) {
  const auto q = library.popularity();
  const std::size_t n = q.size();
  std::vector<double> c(n, 0.0);
  std::vector<bool> clipped(n, false);
  double budget = static_cast<double>(library.cache_size());

  // Each pass clips at least one more file, so n passes suffice.
  for (std::size_t pass = 0; pass < n; ++pass) {
    double free_mass = 0.0;
    for (std::size_t m = n; m-- > 0;) {
      if (!clipped[m]) free_mass += q[m];
    }
    if (free_mass <= 0.0) break;
    bool any_clipped = false;
    for (std::size_t m = 0; m < n; ++m) {
      if (clipped[m]) continue;
      c[m] = budget * q[m] / free_mass;
      if (c[m] > 1.0) {
        c[m] = 1.0;
        clipped[m] = true;
        budget -= 1.0;
        any_clipped = true;
      }
    }
    if (!any_clipped) break;
  }
  return CachingPolicy(std::move(c));
}

CachingPolicy policy_uniform(const ContentLibrary& library) {
  const double share =
      static_cast<double>(library.cache_size()) / static_cast<double>(library.n_files());
  return CachingPolicy(std::vector<double>(library.n_files(), share));
}

double policy_entropy(const CachingPolicy& policy) {
  const double total = policy.sum();
  if (!(total > 0.0)) return 0.0;
  double h = 0.0;
  for (double c : policy.probs()) {
    if (c > 0.0) {
      const double p = c / total;
      h -= p * std::log(p);
    }
  }
  return h;
}

}  // namespace d2dcache
