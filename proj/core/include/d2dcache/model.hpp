#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace d2dcache {

/// Spatial and channel parameters of the clustered D2D network. All lengths
/// are in meters and densities in clusters per square meter.
///
/// The SIR threshold is stored linearly as `theta`; the rate threshold is
/// derived from it (theta = 2^rho - 1).
struct NetworkConfig {
  double lambda_p = 40e-6;  ///< cluster-center density [1/m^2]
  double n_bar = 8.0;       ///< mean devices per cluster
  double sigma = 50.0;      ///< offspring displacement std-dev per axis [m]
  double alpha = 4.0;       ///< path-loss exponent, > 2
  double gamma_d = 1.0;     ///< D2D transmit power
  double theta = 1.0;       ///< linear SIR threshold

  double rho() const;

  /// Defaults used throughout the evaluation: sigma = 50 m, n_bar = 8,
  /// 40 clusters/km^2, alpha = 4, theta = 0 dB.
  static NetworkConfig defaults() { return {}; }
};

/// Throws std::invalid_argument naming the first offending field.
void validate(const NetworkConfig& cfg);

double theta_from_rho(double rho);
double theta_from_db(double db);

/// q_m = m^-beta / sum_k k^-beta for m = 1..n_files.
std::vector<double> zipf_popularity(std::size_t n_files, double beta);

/// File catalog with Zipf request probabilities and a per-device cache budget.
class ContentLibrary {
 public:
  ContentLibrary(std::size_t n_files, double beta, std::size_t cache_size);

  /// Library with an explicit popularity vector (must be normalized and
  /// non-increasing). `beta` is informational only.
  static ContentLibrary from_popularity(std::vector<double> popularity, std::size_t cache_size,
                                        double beta = 0.0);

  std::size_t n_files() const noexcept { return popularity_.size(); }
  std::size_t cache_size() const noexcept { return cache_size_; }
  double beta() const noexcept { return beta_; }
  std::span<const double> popularity() const noexcept { return popularity_; }
  double popularity(std::size_t m) const { return popularity_.at(m); }

 private:
  ContentLibrary(std::vector<double> popularity, std::size_t cache_size, double beta);

  std::vector<double> popularity_;
  std::size_t cache_size_;
  double beta_;
};

/// Per-file caching probabilities c_m. Construction does not enforce the
/// placement constraints; use validate_policy for that.
class CachingPolicy {
 public:
  CachingPolicy() = default;
  explicit CachingPolicy(std::vector<double> probs) : probs_(std::move(probs)) {}

  std::size_t size() const noexcept { return probs_.size(); }
  std::span<const double> probs() const noexcept { return probs_; }
  double operator[](std::size_t m) const { return probs_[m]; }
  double sum() const;

 private:
  std::vector<double> probs_;
};

inline constexpr double kPolicySumTolerance = 1e-8;

struct PolicyReport {
  bool ok = true;
  std::vector<std::string> violations;
};

/// Checks 0 <= c_m <= 1 and sum c_m == M. A length mismatch throws
/// std::invalid_argument; constraint breaches are listed in the report.
PolicyReport validate_policy(const CachingPolicy& policy, const ContentLibrary& library);

/// Cache the M most popular files everywhere.
CachingPolicy policy_cpf(const ContentLibrary& library);

/// c_m proportional to q_m, clipped at 1 with the clipped mass redistributed
/// over the remaining files until the budget is met.
CachingPolicy policy_zipf_proportional(const ContentLibrary& library);

/// c_m = M / N_f.
CachingPolicy policy_uniform(const ContentLibrary& library);

/// Shannon entropy (nats) of the normalized vector c / sum(c).
double policy_entropy(const CachingPolicy& policy);

}  // namespace d2dcache
