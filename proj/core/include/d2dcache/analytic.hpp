#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string_view>
#include <vector>

#include "d2dcache/model.hpp"

namespace d2dcache {

/// Tolerances and sample budgets for the numerical evaluation of coverage.
struct QuadratureSpec {
  double rel_tol = 1e-8;
  double abs_tol = 1e-12;
  /// Outer (cluster-distance) integral runs to this multiple of
  /// max(sigma, (t gamma_d)^{1/alpha}); never less than 10 sigma + 5/sqrt(pi lambda_p).
  double v_max_sigma_mult = 60.0;
  /// The Poisson mixture over the number of caterers stops once the
  /// remaining probability mass drops below this.
  double k_max_tail_mass = 1e-9;
  /// Quasi-Monte Carlo points for the k-fold serving-distance integral (k >= 2).
  std::size_t mc_integration_samples = 200000;
  std::uint64_t qmc_seed = 0x5eed5eedULL;

  void validate() const;
};

enum class CoverageMethod { exact_tcp, ppp_bound, closed_form_k1 };

std::string_view to_string(CoverageMethod method);

struct CoverageResult {
  double value = 0.0;
  CoverageMethod method = CoverageMethod::exact_tcp;
  double error_estimate = 0.0;
};

/// Laplace transform of the inter-cluster interference as a function of the
/// product t * gamma_d.
using LaplaceFn = std::function<double(double t_gamma)>;

/// zeta(v, t) = E[t gamma_d / (U^alpha + t gamma_d) | V = v], U Rician(v, sigma).
double zeta_kernel(double v, double t_gamma, const NetworkConfig& cfg, const QuadratureSpec& quad);

/// Exact Laplace transform of the worst-case inter-cluster interference of a
/// Thomas cluster process:
///   L(t) = exp(-2 pi lambda_p int_0^inf (1 - exp(-n_bar zeta(v, t))) v dv).
/// Evaluated as the PPP exponent plus the non-negative correction
///   2 pi lambda_p int (n_bar zeta - 1 + exp(-n_bar zeta)) v dv,
/// which uses 2 pi int zeta v dv = pi (t gamma_d)^{2/alpha} Gamma(1+2/alpha) Gamma(1-2/alpha).
/// The correction integrand decays like v^{1-2 alpha}, so truncation is benign.
double laplace_exact(double t_gamma, const NetworkConfig& cfg, const QuadratureSpec& quad);

/// Natural log of laplace_exact; finite where the transform itself underflows.
double log_laplace_exact(double t_gamma, const NetworkConfig& cfg, const QuadratureSpec& quad);

/// PPP lower bound exp(-pi n_bar lambda_p (t gamma_d)^{2/alpha} Gamma(1+2/alpha) Gamma(1-2/alpha)).
double laplace_ppp_bound(double t_gamma, const NetworkConfig& cfg);

/// Z = 4 sigma^2 pi n_bar lambda_p theta^{2/alpha} Gamma(1+2/alpha) Gamma(1-2/alpha) + 1.
double compute_z(const NetworkConfig& cfg);

/// Tabulated ratio log L_exact / log L_ppp as a function of
/// tau = t gamma_d / sigma^alpha. The ratio depends on (n_bar, alpha) only,
/// so one table serves every sigma and lambda_p. Values lie in (0, 1].
class LaplaceTable {
 public:
  LaplaceTable(double n_bar, double alpha, const QuadratureSpec& quad);
  ~LaplaceTable();
  LaplaceTable(const LaplaceTable&) = delete;
  LaplaceTable& operator=(const LaplaceTable&) = delete;

  double ratio(double tau) const;
  double laplace(double t_gamma, const NetworkConfig& cfg) const;
  double log_laplace(double t_gamma, const NetworkConfig& cfg) const;

  double n_bar() const noexcept { return n_bar_; }
  double alpha() const noexcept { return alpha_; }
  double tau_min() const noexcept;
  double tau_max() const noexcept;

 private:
  struct Spline;
  double n_bar_;
  double alpha_;
  std::unique_ptr<Spline> spline_;
};

/// Process-wide cache of LaplaceTable instances keyed by (n_bar, alpha, tolerances).
std::shared_ptr<const LaplaceTable> shared_laplace_table(double n_bar, double alpha,
                                                         const QuadratureSpec& quad);

/// P[SIR >= theta | k caterers] = E_h[L(theta / sum_i h_i^{-alpha})] with h_i
/// i.i.d. Rayleigh(sqrt(2) sigma). k = 1 uses adaptive quadrature; k >= 2 uses
/// a randomly shifted Sobol rule seeded by quad.qmc_seed.
double coverage_given_k(int k, const NetworkConfig& cfg, const QuadratureSpec& quad,
                        const LaplaceFn& laplace);

/// Caches P[coverage | k] for k up to the Poisson truncation point at c = 1,
/// so that coverage for many caching probabilities costs one sum each.
class CoverageEvaluator {
 public:
  CoverageEvaluator(const NetworkConfig& cfg, const QuadratureSpec& quad, CoverageMethod method);

  CoverageResult operator()(double c) const;

  /// P[coverage | k] for 1 <= k <= max_k().
  double given_k(int k) const;
  int max_k() const noexcept { return static_cast<int>(given_k_.size()); }
  CoverageMethod method() const noexcept { return method_; }

 private:
  NetworkConfig cfg_;
  QuadratureSpec quad_;
  CoverageMethod method_;
  double z_ = 1.0;
  std::vector<double> given_k_;
  std::vector<double> given_k_error_;
};

/// Unconditional coverage of a file cached with probability c: the Poisson
/// (mean c n_bar) mixture of coverage_given_k, with k = 0 contributing zero.
CoverageResult coverage_content(double c, const NetworkConfig& cfg, const QuadratureSpec& quad,
                                CoverageMethod method);

/// Smallest k with P[Poisson(mean) > k] < tail_mass.
int poisson_truncation(double mean, double tail_mass);

/// sum_m q_m (c_m + (1 - c_m) coverage(c_m)).
double offloading_gain(const CachingPolicy& policy, const ContentLibrary& library,
                       const std::function<double(double)>& coverage);

/// sum_m q_m (c_m + (1 - c_m) c_m n_bar e^{-c_m n_bar} / Z).
double offloading_closed_form_k1(const CachingPolicy& policy, const ContentLibrary& library,
                                 const NetworkConfig& cfg);

}  // namespace d2dcache
