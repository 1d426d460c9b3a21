#include "d2dcache/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <limits>
#include <cstdlib>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>

namespace d2dcache {

namespace {

constexpr std::uint64_t kChunk = 256;

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// d^{-alpha} from the squared distance.
double path_gain(double d2, double alpha) {
  if (alpha == 4.0) return 1.0 / (d2 * d2);
  return std::pow(d2, -0.5 * alpha);
}

// Boost's ziggurat samplers are several times faster than the std ones here.
Point2 gaussian_point(double sigma, SimRng& rng) {
  boost::random::normal_distribution<double> n(0.0, sigma);
  const double x = n(rng);
  return {x, n(rng)};
}

// Received power |sum_i G_i d_i^{-alpha/2}|^2 gamma_d of a joint transmission
// by `caterers`, with G_i standard complex Gaussian.
double signal_power(const TcpRealization& net, const std::vector<std::size_t>& caterers,
                    const NetworkConfig& cfg, SimRng& rng) {
  boost::random::normal_distribution<double> half(0.0, std::sqrt(0.5));
  std::complex<double> sum{};
  for (std::size_t i : caterers) {
    const Point2& y = net.representative_offsets[i];
    const double dx = net.representative_center.x + y.x;
    const double dy = net.representative_center.y + y.y;
    const double amp = std::sqrt(path_gain(dx * dx + dy * dy, cfg.alpha));
    const double re = half(rng);
    sum += std::complex<double>(re, half(rng)) * amp;
  }
  return cfg.gamma_d * std::norm(sum);
}

double sir(double signal, double interference) {
  return interference > 0.0 ? signal / interference : std::numeric_limits<double>::infinity();
}

void draw_caterers(const TcpRealization& net, double c, SimRng& rng,
                   std::vector<std::size_t>& out) {
  out.clear();
  std::bernoulli_distribution has(std::clamp(c, 0.0, 1.0));
  for (std::size_t i = 0; i < net.representative_offsets.size(); ++i) {
    if (has(rng)) out.push_back(i);
  }
}

// Remote clusters in order of increasing distance: the enclosed area grows by
// Exp(lambda_p) increments, which is a homogeneous PPP restricted to the disc.
// Realizations for two radii therefore agree on the inner disc, so changing
// r_sim only adds or removes the outer annulus.
template <class OnCluster, class OnDevice>
void for_each_remote(const NetworkConfig& cfg, double r_sim, SimRng& rng, OnCluster on_cluster,
                     OnDevice on_device) {
  boost::random::exponential_distribution<double> area_step(cfg.lambda_p);
  boost::random::poisson_distribution<std::size_t, double> members(cfg.n_bar);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  boost::random::normal_distribution<double> offset(0.0, cfg.sigma);
  const double max_area = std::numbers::pi * r_sim * r_sim;
  double area = 0.0;
  while (true) {
    area += area_step(rng);
    if (area > max_area) break;
    const double r = std::sqrt(area / std::numbers::pi);
    const double phi = 2.0 * std::numbers::pi * unit(rng);
    const Point2 center{r * std::cos(phi), r * std::sin(phi)};
    const std::size_t k = members(rng);
    on_cluster(center, k);
    for (std::size_t i = 0; i < k; ++i) {
      const double x = center.x + offset(rng);
      on_device(Point2{x, center.y + offset(rng)}, rng);
    }
  }
}

// Same law as sample_remote followed by sample_interference, without storing
// the devices.
double stream_remote_interference(const NetworkConfig& cfg, double r_sim, SimRng& rng) {
  boost::random::exponential_distribution<double> fading(1.0);
  double total = 0.0;
  for_each_remote(
      cfg, r_sim, rng, [](const Point2&, std::size_t) {},
      [&](const Point2& p, SimRng& g) {
        total += fading(g) * path_gain(p.x * p.x + p.y * p.y, cfg.alpha);
      });
  return cfg.gamma_d * total;
}

struct ChunkSums {
  double sum = 0.0;
  double sum_sq = 0.0;
};

// Runs `trial(index, scratch)` over [0, trials) on the worker pool. Per-chunk
// sums are combined in chunk order, so the result does not depend on the
// number of workers.
template <class Scratch, class Trial>
ChunkSums run_trials(std::uint64_t trials, Trial trial) {
  const std::uint64_t chunks = (trials + kChunk - 1) / kChunk;
  std::vector<ChunkSums> partial(chunks);
  std::atomic<std::uint64_t> next{0};
  auto work = [&] {
    Scratch scratch;
    for (std::uint64_t k = next++; k < chunks; k = next++) {
      ChunkSums s;
      const std::uint64_t end = std::min(trials, (k + 1) * kChunk);
      for (std::uint64_t i = k * kChunk; i < end; ++i) {
        const double v = trial(i, scratch);
        s.sum += v;
        s.sum_sq += v * v;
      }
      partial[k] = s;
    }
  };
  const unsigned workers =
      static_cast<unsigned>(std::min<std::uint64_t>(worker_count(), std::max<std::uint64_t>(chunks, 1)));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  ChunkSums total;
  for (const auto& s : partial) {
    total.sum += s.sum;
    total.sum_sq += s.sum_sq;
  }
  return total;
}

MonteCarloEstimate summarize(const ChunkSums& s, std::uint64_t trials, std::uint64_t seed,
                             bool bernoulli) {
  MonteCarloEstimate est;
  est.trials = trials;
  est.seed = seed;
  const double n = static_cast<double>(trials);
  est.mean = s.sum / n;
  double var = 0.0;
  if (bernoulli) {
    var = est.mean * (1.0 - est.mean);
  } else if (trials > 1) {
    var = std::max(0.0, (s.sum_sq - n * est.mean * est.mean) / (n - 1.0));
  }
  est.half_width_95 = 1.959963984540054 * std::sqrt(var / n);
  return est;
}

void require_trials(std::uint64_t trials) {
  if (trials == 0) throw std::invalid_argument("simulation needs at least one trial");
}

double resolve_radius(double r_sim, const NetworkConfig& cfg) {
  return r_sim > 0.0 ? r_sim : default_sim_radius(cfg);
}

struct Scratch {
  TcpRealization net;
  std::vector<std::size_t> caterers;
  std::vector<std::pair<double, double>> signals;  // (q_m (1 - c_m), received power)
};

}  // namespace

void TcpRealization::clear() {
  cluster_centers.clear();
  member_counts.clear();
  remote_devices.clear();
  representative_center = {};
  representative_offsets.clear();
}

SimRng trial_rng(std::uint64_t seed, std::uint64_t trial) {
  std::uint64_t state = seed ^ (0xd1b54a32d192ed03ULL * (trial + 1));
  std::seed_seq seq{static_cast<std::uint32_t>(splitmix64(state)),
                    static_cast<std::uint32_t>(splitmix64(state)),
                    static_cast<std::uint32_t>(splitmix64(state)),
                    static_cast<std::uint32_t>(splitmix64(state))};
  return SimRng(seq);
}

double default_sim_radius(const NetworkConfig& cfg) {
  validate(cfg);
  return 20.0 / std::sqrt(std::numbers::pi * cfg.lambda_p) + 10.0 * cfg.sigma;
}

unsigned worker_count() {
  if (const char* env = std::getenv("D2DCACHE_WORKERS"); env != nullptr && *env != '\0') {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void sample_representative(const NetworkConfig& cfg, SimRng& rng, TcpRealization& out) {
  validate(cfg);
  out.representative_center = gaussian_point(cfg.sigma, rng);
  boost::random::poisson_distribution<std::size_t, double> members(cfg.n_bar);
  const std::size_t k = members(rng);
  out.representative_offsets.resize(k);
  for (auto& p : out.representative_offsets) p = gaussian_point(cfg.sigma, rng);
}

void sample_remote(const NetworkConfig& cfg, double r_sim, SimRng& rng, TcpRealization& out) {
  validate(cfg);
  if (!(r_sim > 0.0)) throw std::invalid_argument("simulation radius must be > 0");
  out.cluster_centers.clear();
  out.member_counts.clear();
  out.remote_devices.clear();
  for_each_remote(
      cfg, r_sim, rng,
      [&](const Point2& center, std::size_t k) {
        out.cluster_centers.push_back(center);
        out.member_counts.push_back(k);
      },
      [&](const Point2& p, SimRng&) { out.remote_devices.push_back(p); });
}

void sample_network(const NetworkConfig& cfg, double r_sim, SimRng& rng, TcpRealization& out) {
  sample_representative(cfg, rng, out);
  sample_remote(cfg, r_sim, rng, out);
}

TcpRealization sample_network(const NetworkConfig& cfg, double r_sim, std::uint64_t seed) {
  TcpRealization net;
  SimRng rng = trial_rng(seed, 0);
  sample_network(cfg, r_sim, rng, net);
  return net;
}

double sample_interference(const TcpRealization& net, const NetworkConfig& cfg, SimRng& rng) {
  boost::random::exponential_distribution<double> fading(1.0);
  double total = 0.0;
  for (const Point2& p : net.remote_devices) {
    const double d2 = p.x * p.x + p.y * p.y;
    total += fading(rng) * path_gain(d2, cfg.alpha);
  }
  return cfg.gamma_d * total;
}

RequestTrace trace_request(const TcpRealization& net, const CachingPolicy& policy, std::size_t m,
                           const NetworkConfig& cfg, SimRng& rng) {
  if (m >= policy.size()) throw std::out_of_range("file index outside the policy");
  const double c = policy[m];
  RequestTrace trace;
  std::bernoulli_distribution local(std::clamp(c, 0.0, 1.0));
  if (local(rng)) {
    trace.outcome = RequestOutcome::local_hit;
    return trace;
  }
  std::vector<std::size_t> caterers;
  draw_caterers(net, c, rng, caterers);
  trace.caterers = static_cast<int>(caterers.size());
  if (caterers.empty()) {
    trace.outcome = RequestOutcome::cluster_miss;
    return trace;
  }
  // Signal fading first, so that the draws for the remote network come last.
  const double signal = signal_power(net, caterers, cfg, rng);
  trace.sir = sir(signal, sample_interference(net, cfg, rng));
  trace.outcome =
      trace.sir >= cfg.theta ? RequestOutcome::d2d_success : RequestOutcome::d2d_sir_fail;
  return trace;
}

RequestOutcome simulate_request(const TcpRealization& net, const CachingPolicy& policy,
                                std::size_t m, const NetworkConfig& cfg, SimRng& rng) {
  return trace_request(net, policy, m, cfg, rng).outcome;
}

MonteCarloEstimate estimate_coverage(double c, const NetworkConfig& cfg, std::uint64_t trials,
                                     double r_sim, std::uint64_t seed) {
  validate(cfg);
  require_trials(trials);
  if (!(c >= 0.0 && c <= 1.0)) throw std::invalid_argument("caching probability outside [0, 1]");
  const double radius = resolve_radius(r_sim, cfg);
  const auto sums = run_trials<Scratch>(trials, [&](std::uint64_t i, Scratch& s) {
    SimRng rng = trial_rng(seed, i);
    s.net.clear();
    sample_representative(cfg, rng, s.net);
    draw_caterers(s.net, c, rng, s.caterers);
    // Remote clusters only matter once there is someone to download from.
    if (s.caterers.empty()) return 0.0;
    const double signal = signal_power(s.net, s.caterers, cfg, rng);
    const double interference = stream_remote_interference(cfg, radius, rng);
    return sir(signal, interference) >= cfg.theta ? 1.0 : 0.0;
  });
  return summarize(sums, trials, seed, true);
}

MonteCarloEstimate estimate_offloading(const CachingPolicy& policy, const ContentLibrary& library,
                                       const NetworkConfig& cfg, std::uint64_t trials,
                                       std::uint64_t seed, bool stratified, double r_sim) {
  validate(cfg);
  require_trials(trials);
  if (policy.size() != library.n_files()) {
    throw std::invalid_argument("policy and library sizes differ");
  }
  const double radius = resolve_radius(r_sim, cfg);
  const auto q = library.popularity();

  if (!stratified) {
    std::vector<double> weights(q.begin(), q.end());
    const auto sums = run_trials<Scratch>(trials, [&](std::uint64_t i, Scratch& s) {
      SimRng rng = trial_rng(seed, i);
      std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
      const std::size_t m = pick(rng);
      s.net.clear();
      sample_network(cfg, radius, rng, s.net);
      const auto outcome = simulate_request(s.net, policy, m, cfg, rng);
      return outcome == RequestOutcome::local_hit || outcome == RequestOutcome::d2d_success ? 1.0
                                                                                            : 0.0;
    });
    return summarize(sums, trials, seed, true);
  }

  // Every file on every realization. Local hits enter through their
  // probability sum q_m c_m; the interference is shared across files within a
  // trial, which leaves each file's success probability unchanged.
  double local = 0.0;
  for (std::size_t m = 0; m < policy.size(); ++m) local += q[m] * std::clamp(policy[m], 0.0, 1.0);
  const auto sums = run_trials<Scratch>(trials, [&](std::uint64_t i, Scratch& s) {
    SimRng rng = trial_rng(seed, i);
    s.net.clear();
    s.signals.clear();
    sample_representative(cfg, rng, s.net);
    for (std::size_t m = 0; m < policy.size(); ++m) {
      const double c = policy[m];
      if (!(c > 0.0) || c >= 1.0 || q[m] == 0.0) continue;
      draw_caterers(s.net, c, rng, s.caterers);
      if (s.caterers.empty()) continue;
      s.signals.emplace_back(q[m] * (1.0 - c), signal_power(s.net, s.caterers, cfg, rng));
    }
    if (s.signals.empty()) return local;
    const double interference = stream_remote_interference(cfg, radius, rng);
    double gain = local;
    for (const auto& [weight, signal] : s.signals) {
      if (sir(signal, interference) >= cfg.theta) gain += weight;
    }
    return gain;
  });
  return summarize(sums, trials, seed, false);
}

}  // namespace d2dcache
