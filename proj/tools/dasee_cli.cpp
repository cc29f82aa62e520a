// dasee: run the convergence (fig2) and EE-sweep (fig3) campaigns.
//
// Exit codes: 0 success, 1 configuration or I/O error, 2 solver failures above
// the configured failure_threshold.

#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "dasee/sim/campaign.hpp"
#include "dasee/sim/config.hpp"
#include "dasee/sim/csv.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitSolver = 2;

struct RunArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string out;
};

void add_run_options(CLI::App* cmd, RunArgs& args) {
  cmd->add_option("--config", args.config, "configuration file")->required();
  cmd->add_option("--seed", args.seed, "master seed (overrides master_seed)");
  cmd->add_option("--workers", args.workers, "worker threads, 0 = one per hardware thread");
  cmd->add_option("--out", args.out, "output directory")->required();
}

dasee::sim::ExperimentConfig load(const RunArgs& args) {
  auto cfg = dasee::sim::load_config(args.config);
  if (args.seed) cfg.master_seed = *args.seed;
  if (args.workers) cfg.workers = *args.workers;
  cfg.validate();
  return cfg;
}

int report(const char* name, int failures, std::size_t total, double fraction, double threshold, double seconds) {
  std::fprintf(stderr, "%s: %d of %zu runs failed (%.3g%%), %.1f s\n", name, failures, total, 100.0 * fraction, seconds);
  if (fraction > threshold) {
    std::fprintf(stderr, "%s: failure rate above threshold %.3g%%\n", name, 100.0 * threshold);
    return kExitSolver;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-efficient multicast beamforming experiments for distributed antenna systems"};
  app.require_subcommand(1);

  RunArgs fig2_args, fig3_args;
  auto* fig2 = app.add_subcommand("fig2", "EETM convergence traces");
  add_run_options(fig2, fig2_args);
  auto* fig3 = app.add_subcommand("fig3", "EE versus per-RAU power budget");
  add_run_options(fig3, fig3_args);
  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "parse a configuration and echo it");
  validate->add_option("--config", validate_path, "configuration file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  using clock = std::chrono::steady_clock;
  try {
    if (*validate) {
      std::cout << dasee::sim::echo(dasee::sim::load_config(validate_path));
      return kExitOk;
    }
    if (*fig2) {
      const auto cfg = load(fig2_args);
      const auto start = clock::now();
      const auto ds = dasee::sim::run_convergence_experiment(cfg);
      dasee::sim::emit_plotdata(fig2_args.out, ds);
      const double secs = std::chrono::duration<double>(clock::now() - start).count();
      return report("fig2", ds.failures(), ds.traces.size(), ds.failure_fraction(), cfg.failure_threshold, secs);
    }
    if (*fig3) {
      const auto cfg = load(fig3_args);
      const auto start = clock::now();
      const auto ds = dasee::sim::run_ee_sweep(cfg);
      dasee::sim::emit_plotdata(fig3_args.out, ds);
      const double secs = std::chrono::duration<double>(clock::now() - start).count();
      return report("fig3", ds.failures(), ds.rows.size(), ds.failure_fraction(), cfg.failure_threshold, secs);
    }
  } catch (const dasee::sim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const dasee::sim::OutputError& e) {
    std::cerr << "output error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}
