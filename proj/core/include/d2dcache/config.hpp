#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "d2dcache/analytic.hpp"
#include "d2dcache/model.hpp"

namespace d2dcache {

enum class ExperimentKind {
  coverage_vs_sigma,
  offload_vs_beta,
  policy_histogram,
  validate_bounds,
  custom_sweep,
};

std::string_view to_string(ExperimentKind kind);
/// Throws ConfigError for unknown names.
ExperimentKind parse_experiment_kind(std::string_view name);

enum class OutputFormat { csv, jsonl };

std::string_view to_string(OutputFormat format);
OutputFormat parse_output_format(std::string_view name);

/// Parameters that can be swept. Values are stored in SI units (meters,
/// clusters per m^2, linear theta).
enum class SweepParameter { sigma, lambda_p, n_bar, alpha, gamma_d, theta, beta, n_files, cache_size, c };

std::string_view to_string(SweepParameter p);
/// Column name in result tables, e.g. "sigma_m".
std::string_view column_name(SweepParameter p);

struct SweepAxis {
  SweepParameter parameter = SweepParameter::sigma;
  std::vector<double> values;
  int line = 0;  ///< source line, for error messages
};

/// Network-and-library point used by the policy-histogram experiment.
struct ParameterCase {
  double sigma = 0.0;
  double lambda_p = 0.0;
};

enum class Metric { coverage, offloading };

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::coverage_vs_sigma;

  NetworkConfig network;
  std::size_t n_files = 100;
  std::size_t cache_size = 5;
  double beta = 0.5;
  /// Caching probability used by coverage sweeps.
  double c = 1.0;

  QuadratureSpec quadrature;

  /// Swept axes; the run visits their Cartesian product, last axis fastest.
  /// Empty means the experiment's own defaults.
  std::vector<SweepAxis> sweep;
  std::vector<ParameterCase> cases;
  std::vector<Metric> metrics;

  /// Monte Carlo trials per point; 0 skips simulation.
  std::uint64_t trials = 0;
  std::uint64_t seed = 1;
  /// Simulation window radius; 0 selects the default.
  double r_sim = 0.0;
  bool stratified = true;

  std::string out_path;
  OutputFormat format = OutputFormat::csv;

  ContentLibrary library() const { return ContentLibrary(n_files, beta, cache_size); }
};

/// Command-line values that take precedence over the file. They are applied
/// before experiment defaults are filled in.
struct ConfigOverrides {
  std::optional<ExperimentKind> kind;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> trials;
  std::optional<std::string> out_path;
  std::optional<OutputFormat> format;
};

/// Parses a YAML document. Missing keys keep their defaults (so an empty
/// document yields the default evaluation setup). Quantities accept unit
/// suffixes: "50 m", "0.05 km", "40 per km2", "4e-5 per m2", "0 dB".
/// Throws ConfigError with the offending line.
ExperimentSpec parse_config(std::string_view text, const ConfigOverrides& overrides = {});
ExperimentSpec load_config(const std::filesystem::path& path,
                           const ConfigOverrides& overrides = {});

/// Applies experiment defaults (sweep axes, cases) and checks every point of
/// the sweep. Throws ConfigError.
void finalize(ExperimentSpec& spec);

/// Sets one sweepable parameter. Throws ConfigError for values that are not
/// representable (e.g. a fractional file count).
void apply_parameter(ExperimentSpec& spec, SweepParameter p, double value);

}  // namespace d2dcache
