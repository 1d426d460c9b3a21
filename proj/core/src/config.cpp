#include "d2dcache/config.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

#include <yaml-cpp/yaml.h>

#include "d2dcache/errors.hpp"

namespace d2dcache {

namespace {

int line_of(const YAML::Node& node) { return node.Mark().line >= 0 ? node.Mark().line + 1 : 0; }

[[noreturn]] void fail(const YAML::Node& node, const std::string& message) {
  throw ConfigError(message, line_of(node));
}

enum class Quantity { number, length, density, threshold };

std::string lower_no_space(std::string_view s) {
  std::string out;
  for (char ch : s) {
    if (!std::isspace(static_cast<unsigned char>(ch))) {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
  }
  return out;
}

// Scale factor to SI for a unit suffix, or nullopt if the unit does not fit
// the quantity. An empty unit means the quantity's default unit.
std::optional<double> unit_scale(Quantity q, const std::string& unit, bool& is_db) {
  is_db = false;
  switch (q) {
    case Quantity::number:
      if (unit.empty()) return 1.0;
      return std::nullopt;
    case Quantity::length:
      if (unit.empty() || unit == "m") return 1.0;
      if (unit == "km") return 1e3;
      return std::nullopt;
    case Quantity::density:
      if (unit == "perkm2" || unit == "/km2" || unit == "km^-2" || unit == "km-2" ||
          unit == "perkm^2" || unit == "/km^2") {
        return 1e-6;
      }
      if (unit == "perm2" || unit == "/m2" || unit == "m^-2" || unit == "m-2" ||
          unit == "perm^2" || unit == "/m^2") {
        return 1.0;
      }
      return std::nullopt;
    case Quantity::threshold:
      if (unit.empty()) return 1.0;
      if (unit == "db") {
        is_db = true;
        return 1.0;
      }
      return std::nullopt;
  }
  return std::nullopt;
}

std::string_view quantity_hint(Quantity q) {
  switch (q) {
    case Quantity::number: return "a plain number";
    case Quantity::length: return "a length such as \"50 m\" or \"0.05 km\"";
    case Quantity::density: return "a density such as \"40 per km2\" or \"4e-5 per m2\"";
    case Quantity::threshold: return "a linear ratio or a value in dB such as \"0 dB\"";
  }
  return "";
}

double parse_quantity(const YAML::Node& node, Quantity q) {
  if (!node.IsScalar()) fail(node, "expected a scalar value");
  const std::string text = node.Scalar();
  const char* begin = text.data();
  const char* end = begin + text.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(*begin))) ++begin;
  if (begin < end && *begin == '+') ++begin;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || !std::isfinite(value)) {
    fail(node, "cannot read a number from \"" + text + "\"");
  }
  bool is_db = false;
  const auto scale = unit_scale(q, lower_no_space(std::string_view(ptr, end - ptr)), is_db);
  if (!scale) {
    fail(node, "\"" + text + "\" is not " + std::string(quantity_hint(q)));
  }
  return is_db ? theta_from_db(value) : value * *scale;
}

std::uint64_t parse_u64(const YAML::Node& node) {
  if (!node.IsScalar()) fail(node, "expected an unsigned integer");
  const std::string& text = node.Scalar();
  std::uint64_t value = 0;
  const int base = text.rfind("0x", 0) == 0 || text.rfind("0X", 0) == 0 ? 16 : 10;
  const char* begin = text.data() + (base == 16 ? 2 : 0);
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value, base);
  if (ec != std::errc{} || ptr != end || begin == end) {
    fail(node, "\"" + text + "\" is not an unsigned integer");
  }
  return value;
}

std::size_t parse_count(const YAML::Node& node) {
  return static_cast<std::size_t>(parse_u64(node));
}

bool parse_bool(const YAML::Node& node) {
  bool value = false;
  if (!node.IsScalar() || !YAML::convert<bool>::decode(node, value)) {
    fail(node, "expected true or false");
  }
  return value;
}

std::string parse_string(const YAML::Node& node) {
  if (!node.IsScalar()) fail(node, "expected a string");
  return node.Scalar();
}

template <class Handler>
void for_each_key(const YAML::Node& map, std::string_view section, Handler handler) {
  if (!map.IsMap()) fail(map, std::string(section) + " must be a mapping");
  for (const auto& kv : map) {
    const std::string key = kv.first.as<std::string>();
    if (!handler(key, kv.second)) {
      fail(kv.first, "unknown key \"" + key + "\" in " + std::string(section));
    }
  }
}

struct SweepKey {
  std::string_view key;
  SweepParameter parameter;
  Quantity quantity;
  double scale;
  bool db;
};

constexpr std::array kSweepKeys{
    SweepKey{"sigma", SweepParameter::sigma, Quantity::length, 1.0, false},
    SweepKey{"sigma_m", SweepParameter::sigma, Quantity::number, 1.0, false},
    SweepKey{"lambda_p", SweepParameter::lambda_p, Quantity::density, 1.0, false},
    SweepKey{"lambda_p_per_km2", SweepParameter::lambda_p, Quantity::number, 1e-6, false},
    SweepKey{"lambda_p_per_m2", SweepParameter::lambda_p, Quantity::number, 1.0, false},
    SweepKey{"n_bar", SweepParameter::n_bar, Quantity::number, 1.0, false},
    SweepKey{"alpha", SweepParameter::alpha, Quantity::number, 1.0, false},
    SweepKey{"gamma_d", SweepParameter::gamma_d, Quantity::number, 1.0, false},
    SweepKey{"theta", SweepParameter::theta, Quantity::threshold, 1.0, false},
    SweepKey{"theta_db", SweepParameter::theta, Quantity::number, 1.0, true},
    SweepKey{"beta", SweepParameter::beta, Quantity::number, 1.0, false},
    SweepKey{"n_files", SweepParameter::n_files, Quantity::number, 1.0, false},
    SweepKey{"cache_size", SweepParameter::cache_size, Quantity::number, 1.0, false},
    SweepKey{"c", SweepParameter::c, Quantity::number, 1.0, false},
};

const SweepKey* find_sweep_key(std::string_view key) {
  for (const auto& k : kSweepKeys) {
    if (k.key == key) return &k;
  }
  return nullptr;
}

double parse_keyed(const SweepKey& k, const YAML::Node& node) {
  const double v = parse_quantity(node, k.quantity);
  return k.db ? theta_from_db(v) : v * k.scale;
}

void parse_network(const YAML::Node& map, ExperimentSpec& spec) {
  for_each_key(map, "network", [&](const std::string& key, const YAML::Node& value) {
    if (key == "rho") {
      const double rho = parse_quantity(value, Quantity::number);
      if (!(rho > 0.0)) fail(value, "rho must be > 0");
      spec.network.theta = theta_from_rho(rho);
      return true;
    }
    const SweepKey* k = find_sweep_key(key);
    if (k == nullptr) return false;
    switch (k->parameter) {
      case SweepParameter::sigma: spec.network.sigma = parse_keyed(*k, value); break;
      case SweepParameter::lambda_p: spec.network.lambda_p = parse_keyed(*k, value); break;
      case SweepParameter::n_bar: spec.network.n_bar = parse_keyed(*k, value); break;
      case SweepParameter::alpha: spec.network.alpha = parse_keyed(*k, value); break;
      case SweepParameter::gamma_d: spec.network.gamma_d = parse_keyed(*k, value); break;
      case SweepParameter::theta: spec.network.theta = parse_keyed(*k, value); break;
      default: return false;
    }
    return true;
  });
}

void parse_library(const YAML::Node& map, ExperimentSpec& spec) {
  for_each_key(map, "library", [&](const std::string& key, const YAML::Node& value) {
    if (key == "n_files") {
      spec.n_files = parse_count(value);
    } else if (key == "cache_size") {
      spec.cache_size = parse_count(value);
    } else if (key == "beta") {
      spec.beta = parse_quantity(value, Quantity::number);
    } else {
      return false;
    }
    return true;
  });
}

void parse_quadrature(const YAML::Node& map, QuadratureSpec& quad) {
  for_each_key(map, "quadrature", [&](const std::string& key, const YAML::Node& value) {
    if (key == "rel_tol") {
      quad.rel_tol = parse_quantity(value, Quantity::number);
    } else if (key == "abs_tol") {
      quad.abs_tol = parse_quantity(value, Quantity::number);
    } else if (key == "v_max_sigma_mult") {
      quad.v_max_sigma_mult = parse_quantity(value, Quantity::number);
    } else if (key == "k_max_tail_mass") {
      quad.k_max_tail_mass = parse_quantity(value, Quantity::number);
    } else if (key == "mc_integration_samples") {
      quad.mc_integration_samples = parse_count(value);
    } else if (key == "qmc_seed") {
      quad.qmc_seed = parse_u64(value);
    } else {
      return false;
    }
    return true;
  });
}

void parse_sweep(const YAML::Node& map, ExperimentSpec& spec) {
  for_each_key(map, "sweep", [&](const std::string& key, const YAML::Node& list) {
    const SweepKey* k = find_sweep_key(key);
    if (k == nullptr) return false;
    SweepAxis axis;
    axis.parameter = k->parameter;
    axis.line = line_of(list);
    if (list.IsScalar()) {
      axis.values.push_back(parse_keyed(*k, list));
    } else if (list.IsSequence()) {
      for (const auto& item : list) axis.values.push_back(parse_keyed(*k, item));
    } else {
      fail(list, "sweep values for \"" + key + "\" must be a list");
    }
    if (axis.values.empty()) fail(list, "sweep list for \"" + key + "\" is empty");
    for (const auto& other : spec.sweep) {
      if (other.parameter == axis.parameter) {
        fail(list, "parameter " + std::string(to_string(axis.parameter)) + " is swept twice");
      }
    }
    spec.sweep.push_back(std::move(axis));
    return true;
  });
}

void parse_cases(const YAML::Node& list, ExperimentSpec& spec) {
  if (!list.IsSequence()) fail(list, "cases must be a list");
  for (const auto& item : list) {
    ParameterCase pc{spec.network.sigma, spec.network.lambda_p};
    ExperimentSpec scratch = spec;
    parse_network(item, scratch);
    pc.sigma = scratch.network.sigma;
    pc.lambda_p = scratch.network.lambda_p;
    spec.cases.push_back(pc);
  }
  if (spec.cases.empty()) fail(list, "cases list is empty");
}

void parse_metrics(const YAML::Node& list, ExperimentSpec& spec) {
  auto one = [&](const YAML::Node& n) {
    const std::string name = parse_string(n);
    if (name == "coverage") {
      spec.metrics.push_back(Metric::coverage);
    } else if (name == "offloading") {
      spec.metrics.push_back(Metric::offloading);
    } else {
      fail(n, "unknown metric \"" + name + "\" (expected coverage or offloading)");
    }
  };
  if (list.IsScalar()) {
    one(list);
  } else if (list.IsSequence()) {
    for (const auto& n : list) one(n);
  } else {
    fail(list, "metrics must be a list");
  }
}

void parse_output(const YAML::Node& map, ExperimentSpec& spec) {
  for_each_key(map, "output", [&](const std::string& key, const YAML::Node& value) {
    if (key == "path") {
      spec.out_path = parse_string(value);
    } else if (key == "format") {
      try {
        spec.format = parse_output_format(parse_string(value));
      } catch (const ConfigError& e) {
        fail(value, e.what());
      }
    } else {
      return false;
    }
    return true;
  });
}

void check_point(const ExperimentSpec& spec, int line) {
  try {
    validate(spec.network);
    (void)spec.library();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what(), line);
  }
  if (!(spec.c >= 0.0 && spec.c <= 1.0)) {
    throw ConfigError("caching probability c must lie in [0, 1]", line);
  }
}

bool allowed_axis(ExperimentKind kind, SweepParameter p) {
  switch (kind) {
    case ExperimentKind::coverage_vs_sigma:
      return p == SweepParameter::sigma || p == SweepParameter::lambda_p;
    case ExperimentKind::offload_vs_beta:
      return p == SweepParameter::beta;
    case ExperimentKind::policy_histogram:
    case ExperimentKind::validate_bounds:
      return false;
    case ExperimentKind::custom_sweep:
      return true;
  }
  return false;
}

}  // namespace

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::coverage_vs_sigma: return "coverage-vs-sigma";
    case ExperimentKind::offload_vs_beta: return "offload-vs-beta";
    case ExperimentKind::policy_histogram: return "policy-histogram";
    case ExperimentKind::validate_bounds: return "validate-bounds";
    case ExperimentKind::custom_sweep: return "custom-sweep";
  }
  return "unknown";
}

ExperimentKind parse_experiment_kind(std::string_view name) {
  for (auto kind : {ExperimentKind::coverage_vs_sigma, ExperimentKind::offload_vs_beta,
                    ExperimentKind::policy_histogram, ExperimentKind::validate_bounds,
                    ExperimentKind::custom_sweep}) {
    if (to_string(kind) == name) return kind;
  }
  throw ConfigError("unknown experiment \"" + std::string(name) +
                    "\" (expected coverage-vs-sigma, offload-vs-beta, policy-histogram, "
                    "validate-bounds or custom-sweep)");
}

std::string_view to_string(OutputFormat format) {
  return format == OutputFormat::csv ? "csv" : "jsonl";
}

OutputFormat parse_output_format(std::string_view name) {
  if (name == "csv") return OutputFormat::csv;
  if (name == "jsonl" || name == "json-lines") return OutputFormat::jsonl;
  throw ConfigError("unknown output format \"" + std::string(name) + "\" (expected csv or jsonl)");
}

std::string_view to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::sigma: return "sigma";
    case SweepParameter::lambda_p: return "lambda_p";
    case SweepParameter::n_bar: return "n_bar";
    case SweepParameter::alpha: return "alpha";
    case SweepParameter::gamma_d: return "gamma_d";
    case SweepParameter::theta: return "theta";
    case SweepParameter::beta: return "beta";
    case SweepParameter::n_files: return "n_files";
    case SweepParameter::cache_size: return "cache_size";
    case SweepParameter::c: return "c";
  }
  return "unknown";
}

std::string_view column_name(SweepParameter p) {
  switch (p) {
    case SweepParameter::sigma: return "sigma_m";
    case SweepParameter::lambda_p: return "lambda_p_per_m2";
    default: return to_string(p);
  }
}

void apply_parameter(ExperimentSpec& spec, SweepParameter p, double value) {
  auto as_count = [&](const char* what) {
    if (!(value >= 0.0) || value != std::floor(value) || value > 1e9) {
      throw ConfigError(std::string(what) + " must be a non-negative integer");
    }
    return static_cast<std::size_t>(value);
  };
  switch (p) {
    case SweepParameter::sigma: spec.network.sigma = value; break;
    case SweepParameter::lambda_p: spec.network.lambda_p = value; break;
    case SweepParameter::n_bar: spec.network.n_bar = value; break;
    case SweepParameter::alpha: spec.network.alpha = value; break;
    case SweepParameter::gamma_d: spec.network.gamma_d = value; break;
    case SweepParameter::theta: spec.network.theta = value; break;
    case SweepParameter::beta: spec.beta = value; break;
    case SweepParameter::n_files: spec.n_files = as_count("n_files"); break;
    case SweepParameter::cache_size: spec.cache_size = as_count("cache_size"); break;
    case SweepParameter::c: spec.c = value; break;
  }
}

namespace {

void apply_overrides(ExperimentSpec& spec, const ConfigOverrides& o) {
  if (o.kind) spec.kind = *o.kind;
  if (o.seed) spec.seed = *o.seed;
  if (o.trials) spec.trials = *o.trials;
  if (o.out_path) spec.out_path = *o.out_path;
  if (o.format) spec.format = *o.format;
}

}  // namespace

ExperimentSpec parse_config(std::string_view text, const ConfigOverrides& overrides) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(e.msg, e.mark.line >= 0 ? e.mark.line + 1 : 0);
  }
  ExperimentSpec spec;
  if (root.IsNull()) {
    apply_overrides(spec, overrides);
    finalize(spec);
    return spec;
  }
  if (!root.IsMap()) fail(root, "top level must be a mapping");

  // Sections that depend on the base network (cases, sweep) are parsed after
  // it so that defaults are taken from the final values.
  std::optional<YAML::Node> cases;
  std::optional<YAML::Node> sweep;
  for_each_key(root, "the top level", [&](const std::string& key, const YAML::Node& value) {
    if (key == "experiment") {
      try {
        spec.kind = parse_experiment_kind(parse_string(value));
      } catch (const ConfigError& e) {
        fail(value, e.what());
      }
    } else if (key == "seed") {
      spec.seed = parse_u64(value);
    } else if (key == "trials") {
      spec.trials = parse_u64(value);
    } else if (key == "r_sim") {
      spec.r_sim = parse_quantity(value, Quantity::length);
      if (spec.r_sim < 0.0) fail(value, "r_sim must be >= 0");
    } else if (key == "stratified") {
      spec.stratified = parse_bool(value);
    } else if (key == "c") {
      spec.c = parse_quantity(value, Quantity::number);
    } else if (key == "network") {
      parse_network(value, spec);
    } else if (key == "library") {
      parse_library(value, spec);
    } else if (key == "quadrature") {
      parse_quadrature(value, spec.quadrature);
    } else if (key == "sweep") {
      sweep = value;
    } else if (key == "cases") {
      cases = value;
    } else if (key == "metrics") {
      parse_metrics(value, spec);
    } else if (key == "output") {
      parse_output(value, spec);
    } else {
      return false;
    }
    return true;
  });
  if (sweep) parse_sweep(*sweep, spec);
  if (cases) parse_cases(*cases, spec);

  try {
    spec.quadrature.validate();
  } catch (const std::invalid_argument& e) {
    const YAML::Node q = root["quadrature"];
    throw ConfigError(e.what(), q ? line_of(q) : 0);
  }
  apply_overrides(spec, overrides);
  finalize(spec);
  return spec;
}

ExperimentSpec load_config(const std::filesystem::path& path, const ConfigOverrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), overrides);
}

void finalize(ExperimentSpec& spec) {
  for (const auto& axis : spec.sweep) {
    if (!allowed_axis(spec.kind, axis.parameter)) {
      throw ConfigError("experiment " + std::string(to_string(spec.kind)) + " cannot sweep " +
                            std::string(to_string(axis.parameter)),
                        axis.line);
    }
  }
  if (!spec.cases.empty() && spec.kind != ExperimentKind::policy_histogram) {
    throw ConfigError("cases are only used by policy-histogram");
  }

  switch (spec.kind) {
    case ExperimentKind::coverage_vs_sigma: {
      const bool has_sigma = std::any_of(spec.sweep.begin(), spec.sweep.end(), [](const auto& a) {
        return a.parameter == SweepParameter::sigma;
      });
      const bool has_lambda = std::any_of(spec.sweep.begin(), spec.sweep.end(), [](const auto& a) {
        return a.parameter == SweepParameter::lambda_p;
      });
      if (!has_sigma) spec.sweep.insert(spec.sweep.begin(), {SweepParameter::sigma, {10.0, 25.0, 50.0, 100.0}, 0});
      if (!has_lambda) spec.sweep.push_back({SweepParameter::lambda_p, {10e-6, 20e-6, 40e-6}, 0});
      // Sigma outer, lambda_p inner.
      std::stable_sort(spec.sweep.begin(), spec.sweep.end(), [](const auto& a, const auto& b) {
        return a.parameter == SweepParameter::sigma && b.parameter != SweepParameter::sigma;
      });
      break;
    }
    case ExperimentKind::offload_vs_beta:
      if (spec.sweep.empty()) {
        std::vector<double> betas;
        for (int i = 0; i <= 6; ++i) betas.push_back(0.25 * i);
        spec.sweep.push_back({SweepParameter::beta, std::move(betas), 0});
      }
      break;
    case ExperimentKind::policy_histogram:
      if (spec.cases.empty()) spec.cases = {{10.0, 20e-6}, {100.0, 50e-6}};
      break;
    case ExperimentKind::validate_bounds:
      break;
    case ExperimentKind::custom_sweep:
      if (spec.sweep.empty()) throw ConfigError("custom-sweep needs at least one sweep axis");
      if (spec.metrics.empty()) spec.metrics.push_back(Metric::coverage);
      break;
  }

  check_point(spec, 0);
  std::size_t points = 1;
  for (const auto& axis : spec.sweep) {
    points *= axis.values.size();
    if (points > 1'000'000) throw ConfigError("sweep has more than 10^6 points", axis.line);
  }
  std::vector<std::size_t> index(spec.sweep.size(), 0);
  for (std::size_t n = 0; n < points && !spec.sweep.empty(); ++n) {
    ExperimentSpec point = spec;
    for (std::size_t a = 0; a < spec.sweep.size(); ++a) {
      const auto& axis = spec.sweep[a];
      try {
        apply_parameter(point, axis.parameter, axis.values[index[a]]);
      } catch (const ConfigError& e) {
        throw ConfigError(e.what(), axis.line);
      }
    }
    check_point(point, spec.sweep.back().line);
    for (std::size_t a = spec.sweep.size(); a-- > 0;) {
      if (++index[a] < spec.sweep[a].values.size()) break;
      index[a] = 0;
    }
  }
  for (const auto& pc : spec.cases) {
    ExperimentSpec point = spec;
    point.network.sigma = pc.sigma;
    point.network.lambda_p = pc.lambda_p;
    check_point(point, 0);
  }
}

}  // namespace d2dcache
