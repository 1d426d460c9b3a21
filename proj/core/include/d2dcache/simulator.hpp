#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "d2dcache/model.hpp"

namespace d2dcache {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// One sampled network, in coordinates where the typical (requesting) device
/// sits at the origin.
struct TcpRealization {
  /// Remote cluster centers, uniform in a disc of radius r_sim.
  std::vector<Point2> cluster_centers;
  /// Devices per remote cluster; `remote_devices` is grouped in this order.
  std::vector<std::size_t> member_counts;
  /// Absolute positions of all remote-cluster devices.
  std::vector<Point2> remote_devices;
  /// Center x0 of the typical device's own cluster (distance ~ Rayleigh(sigma)).
  Point2 representative_center;
  /// Offsets y_i, relative to x0, of the other members of the typical
  /// device's cluster. The typical device itself is not included.
  std::vector<Point2> representative_offsets;

  void clear();
};

enum class RequestOutcome { local_hit, d2d_success, d2d_sir_fail, cluster_miss };

/// Outcome of one request with the quantities behind it.
struct RequestTrace {
  RequestOutcome outcome = RequestOutcome::cluster_miss;
  int caterers = 0;
  double sir = 0.0;
};

struct MonteCarloEstimate {
  double mean = 0.0;
  double half_width_95 = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
};

using SimRng = std::mt19937_64;

/// Independent generator for trial `trial` of a run seeded with `seed`.
SimRng trial_rng(std::uint64_t seed, std::uint64_t trial);

/// 20 / sqrt(pi lambda_p) + 10 sigma.
double default_sim_radius(const NetworkConfig& cfg);

/// Worker threads for the estimators: D2DCACHE_WORKERS if set, otherwise the
/// hardware concurrency.
unsigned worker_count();

void sample_representative(const NetworkConfig& cfg, SimRng& rng, TcpRealization& out);

/// Remote clusters are generated in order of increasing distance, so two
/// radii with the same generator state agree on the inner disc.
void sample_remote(const NetworkConfig& cfg, double r_sim, SimRng& rng, TcpRealization& out);

/// Full realization: representative cluster first, then the remote clusters.
void sample_network(const NetworkConfig& cfg, double r_sim, SimRng& rng, TcpRealization& out);
TcpRealization sample_network(const NetworkConfig& cfg, double r_sim, std::uint64_t seed);

/// Worst-case interference at the origin: every remote device transmits with
/// power gamma_d and unit-mean exponential power fading.
double sample_interference(const TcpRealization& net, const NetworkConfig& cfg, SimRng& rng);

/// Serves a request for file `m` (0-based): local cache with probability c_m,
/// otherwise joint transmission from the members of the representative
/// cluster that cache the file (each independently with probability c_m).
RequestTrace trace_request(const TcpRealization& net, const CachingPolicy& policy, std::size_t m,
                           const NetworkConfig& cfg, SimRng& rng);

RequestOutcome simulate_request(const TcpRealization& net, const CachingPolicy& policy,
                                std::size_t m, const NetworkConfig& cfg, SimRng& rng);

/// Probability that a D2D download of a file cached with probability c
/// succeeds (SIR >= theta); zero caterers count as failure.
/// `r_sim <= 0` selects default_sim_radius.
MonteCarloEstimate estimate_coverage(double c, const NetworkConfig& cfg, std::uint64_t trials,
                                     double r_sim, std::uint64_t seed);

/// Offloading gain: probability that a request is a local hit or a
/// successful D2D download. Stratified: local hits enter as sum q_m c_m and
/// every file's D2D attempt is evaluated on each realization, weighted by
/// q_m (1 - c_m); the half-width comes from the sample variance. Otherwise
/// one file is drawn from q per trial and the outcome is Bernoulli.
MonteCarloEstimate estimate_offloading(const CachingPolicy& policy, const ContentLibrary& library,
                                       const NetworkConfig& cfg, std::uint64_t trials,
                                       std::uint64_t seed, bool stratified = true,
                                       double r_sim = 0.0);

}  // namespace d2dcache
