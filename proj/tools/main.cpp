// d2dcache: batch runner for the clustered D2D caching experiments.
//
//   d2dcache run --config FILE [--experiment NAME] [--seed U64] [--trials N]
//                [--out PATH] [--format csv|jsonl] [--quiet]
//   d2dcache solve --config FILE
//
// Exit codes: 0 success, 2 configuration or usage error, 3 numerical failure,
// 1 anything else (I/O). D2DCACHE_WORKERS sets the simulation thread count.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "d2dcache/config.hpp"
#include "d2dcache/errors.hpp"
#include "d2dcache/experiment.hpp"
#include "d2dcache/results.hpp"
#include "d2dcache/simulator.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct RunArgs {
  std::string config;
  std::optional<std::string> experiment;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> trials;
  std::optional<std::string> out;
  std::optional<std::string> format;
  bool quiet = false;
};

d2dcache::ConfigOverrides overrides_from(const RunArgs& a) {
  d2dcache::ConfigOverrides o;
  if (a.experiment) o.kind = d2dcache::parse_experiment_kind(*a.experiment);
  o.seed = a.seed;
  o.trials = a.trials;
  o.out_path = a.out;
  if (a.format) o.format = d2dcache::parse_output_format(*a.format);
  return o;
}

int cmd_run(const RunArgs& args) {
  const auto spec = d2dcache::load_config(args.config, overrides_from(args));
  if (!args.quiet) {
    std::cerr << "experiment " << d2dcache::to_string(spec.kind) << ", seed " << spec.seed
              << ", trials " << spec.trials << ", workers " << d2dcache::worker_count() << '\n';
  }
  d2dcache::ProgressFn progress;
  if (!args.quiet) progress = [](std::string_view line) { std::cerr << "  " << line << '\n'; };
  const auto table = d2dcache::run_experiment(spec, progress);
  d2dcache::emit_results(table, spec.format, spec.out_path);
  return kExitOk;
}

int cmd_solve(const std::string& config) {
  const auto spec = d2dcache::load_config(config);
  const auto report = d2dcache::solve(spec);
  const auto lib = spec.library();
  std::printf("objective %.12g\n", report.objective_closed_form);
  std::printf("multiplier %.12g\n", report.multiplier);
  std::printf("z %.12g\n", report.z);
  std::printf("entropy %.12g\n", report.entropy);
  std::printf("duality_gap %s\n", report.diagnostics.duality_gap ? "true" : "false");
  std::printf("file,popularity,c,case\n");
  for (std::size_t m = 0; m < report.policy.size(); ++m) {
    std::printf("%zu,%.12g,%.12g,%s\n", m + 1, lib.popularity(m), report.policy[m],
                std::string(d2dcache::to_string(report.diagnostics.cases[m])).c_str());
  }
  for (const auto& w : report.diagnostics.concavity_warnings) {
    std::fprintf(stderr, "note: %s\n", w.c_str());
  }
  return kExitOk;
}

void diagnostic(const char* kind, const std::string& message, const std::string& config) {
  nlohmann::json record{{"error", kind}, {"message", message}, {"config", config}};
  std::cerr << record.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probabilistic caching in clustered D2D networks: analysis, optimization and "
               "Monte Carlo experiments"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Run an experiment and write a result table");
  run->add_option("--config", run_args.config, "YAML experiment file")->required();
  run->add_option("--experiment", run_args.experiment,
                  "coverage-vs-sigma | offload-vs-beta | policy-histogram | validate-bounds | "
                  "custom-sweep");
  run->add_option("--seed", run_args.seed, "Monte Carlo seed");
  run->add_option("--trials", run_args.trials, "Monte Carlo trials per point (0 = analytic only)");
  run->add_option("--out", run_args.out, "Output path ('-' for stdout)");
  run->add_option("--format", run_args.format, "csv | jsonl");
  run->add_flag("--quiet,-q", run_args.quiet, "Suppress progress on stderr");

  std::string solve_config;
  auto* solve = app.add_subcommand("solve", "Print the optimized caching vector and objective");
  solve->add_option("--config", solve_config, "YAML experiment file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  const std::string& config = run->parsed() ? run_args.config : solve_config;
  try {
    if (run->parsed()) return cmd_run(run_args);
    return cmd_solve(solve_config);
  } catch (const d2dcache::ConfigError& e) {
    std::cerr << "config error: " << config << ": " << e.what() << '\n';
    return kExitConfig;
  } catch (const d2dcache::NumericalError& e) {
    diagnostic("numerical", e.what(), config);
    return kExitNumerical;
  } catch (const d2dcache::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitOther;
  } catch (const std::invalid_argument& e) {
    // Invalid model inputs that slipped past the loader.
    std::cerr << "config error: " << config << ": " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitOther;
  }
}
