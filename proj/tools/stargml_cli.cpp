// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The stargml Authors
//
// Command-line front end: single solves, experiments, gradient checks and
// timing probes.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include "CLI11.hpp"
#include "stargml/channels.hpp"
#include "stargml/config_io.hpp"
#include "stargml/errors.hpp"
#include "stargml/harness.hpp"

namespace {

using namespace stargml;

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string mode;
  bool paper_scale = false;
};

void add_scale_flags(CLI::App* cmd, CommonOptions& opts) {
  auto* paper = cmd->add_flag("--paper-scale", opts.paper_scale,
                              "M=64, N=100, K=4, 500 epochs");
  auto* desk = cmd->add_flag("--desk-scale", "M=8, N=16, K=2, 300 epochs (default)");
  paper->excludes(desk);
}

RunConfig resolve_config(const CommonOptions& opts) {
  RunConfig cfg = opts.paper_scale ? paper_run_config() : desk_run_config();
  if (!opts.config_path.empty()) cfg = load_run_config(opts.config_path, cfg);
  if (opts.seed) {
    cfg.train.seed = *opts.seed;
    cfg.channel.seed = *opts.seed;
  }
  if (!opts.mode.empty()) cfg.train.mode = parse_phase_model(opts.mode);
  cfg.validate();
  return cfg;
}

int cmd_run(const CommonOptions& opts, const std::string& scheme_name,
            const std::string& out_dir) {
  const RunConfig cfg = resolve_config(opts);
  Scheme scheme = cfg.train.mode == PhaseModel::coupled ? Scheme::gml_coupled
                                                        : Scheme::gml_independent;
  if (!scheme_name.empty()) scheme = parse_scheme(scheme_name);

  std::mt19937_64 rng(cfg.channel.seed);
  const ChannelSet ch = generate_channels(cfg.system, cfg.channel, rng);
  const Solution sol = run_scheme(scheme, cfg, ch, 2000);

  std::cout << std::setprecision(10) << "scheme " << to_string(scheme)
            << "  M=" << cfg.system.M << " N=" << cfg.system.N
            << " K=" << cfg.system.K << "\nwsr_opt " << sol.wsr_opt << '\n';
  std::cout << "residual_unprojected " << sol.residual_unprojected << '\n';
  if (out_dir.empty()) return 0;

  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  auto open = [](const std::filesystem::path& p) {
    std::ofstream os(p);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    return os;
  };
  open(dir / "config.json") << to_json(cfg).dump(2) << '\n';
  open(dir / "solution.json") << solution_to_json(sol).dump(2) << '\n';
  {
    auto os = open(dir / "channels.txt");
    write_channels(os, ch);
  }
  auto os = open(dir / "convergence.csv");
  os << std::setprecision(17) << kConvergenceHeader << '\n';
  for (const auto& e : sol.trace) {
    os << e.epoch << ',' << e.wsr_best << ',' << e.wsr_current << ','
       << e.penalty << ',' << e.rho << '\n';
  }
  std::cout << "wrote " << dir.string() << '\n';
  return 0;
}

int cmd_experiment(const std::string& spec_path, const std::string& out_dir,
                   std::optional<std::uint64_t> seed) {
  ExperimentSpec spec = load_experiment_spec(spec_path);
  if (!out_dir.empty()) spec.out_dir = out_dir;
  if (seed) spec.master_seed = *seed;
  const ExperimentReport report = run_experiment(spec);

  std::cout << to_string(spec.kind) << ": " << report.records.size()
            << " cells\n";
  for (const auto& a : report.aggregates) {
    std::cout << "  " << std::left << std::setw(17) << to_string(a.scheme)
              << " grid " << std::setw(6) << a.grid_value << " mean "
              << a.mean_wsr << " std " << a.std_wsr << " (n=" << a.count << ")\n";
  }
  for (const auto& t : report.timing) {
    std::cout << "  M=" << t.M << " N=" << t.N << " K=" << t.K << " median "
              << t.median_s_per_epoch << " s/epoch, min " << t.min_s_per_epoch
              << '\n';
  }
  for (const auto& r : report.records) {
    if (r.failed) {
      std::cerr << "cell " << to_string(r.scheme) << " grid " << r.grid_value
                << " sample " << r.sample << " failed: " << r.error << '\n';
    }
  }
  for (const auto& f : report.files) std::cout << "wrote " << f << '\n';
  return report.any_failed ? 1 : 0;
}

int cmd_time(const CommonOptions& opts, std::size_t repetitions,
             std::optional<std::size_t> epochs) {
  RunConfig cfg = resolve_config(opts);
  if (epochs) cfg.train.n_epochs = *epochs;
  const TimingResult t =
      timing_probe(cfg.system, cfg.train, repetitions, cfg.channel);
  std::cout << kTimingHeader << '\n'
            << cfg.system.M << ',' << cfg.system.N << ',' << cfg.system.K << ','
            << t.median_s_per_epoch << ',' << t.min_s_per_epoch << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"STAR-RIS beamforming with gradient-based meta learning"};
  app.require_subcommand(1);

  CommonOptions run_opts;
  std::string scheme, run_out;
  auto* run = app.add_subcommand("run", "single solve; prints WSR and writes the solution");
  run->add_option("--config", run_opts.config_path, "JSON run config")->check(CLI::ExistingFile);
  run->add_option("--seed", run_opts.seed, "seed for channels and training");
  run->add_option("--mode", run_opts.mode, "independent | coupled")
      ->check(CLI::IsMember({"independent", "coupled"}));
  run->add_option("--scheme", scheme,
                  "gml_independent | gml_coupled | random_phase | conventional_ris | pga_oracle");
  run->add_option("--out", run_out, "directory for solution.json, convergence.csv, ...");
  add_scale_flags(run, run_opts);

  std::string spec_path, exp_out;
  std::optional<std::uint64_t> exp_seed;
  auto* exp = app.add_subcommand("experiment", "run an experiment spec file");
  exp->add_option("spec", spec_path, "JSON experiment spec")->required()->check(CLI::ExistingFile);
  exp->add_option("--out", exp_out, "output directory (overrides the experiment file)");
  exp->add_option("--seed", exp_seed, "master seed (overrides the experiment file)");

  GradCheckOptions gc;
  auto* grad = app.add_subcommand("grad-check", "analytic gradients vs finite differences");
  grad->add_option("--seed", gc.seed, "instance seed");
  grad->add_option("--instances", gc.instances, "number of random instances")
      ->check(CLI::PositiveNumber);

  CommonOptions time_opts;
  std::size_t repetitions = 5;
  std::optional<std::size_t> epochs;
  auto* time = app.add_subcommand("time", "per-epoch wall-clock of one configuration");
  time->add_option("--config", time_opts.config_path, "JSON run config")->check(CLI::ExistingFile);
  time->add_option("--seed", time_opts.seed, "seed for channels and training");
  time->add_option("--mode", time_opts.mode, "independent | coupled")
      ->check(CLI::IsMember({"independent", "coupled"}));
  time->add_option("--repetitions", repetitions, "measured runs (>= 3)");
  time->add_option("--epochs", epochs, "epochs per run");
  add_scale_flags(time, time_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_opts, scheme, run_out);
    if (*exp) return cmd_experiment(spec_path, exp_out, exp_seed);
    if (*grad) return grad_check_command(gc, std::cout);
    if (*time) return cmd_time(time_opts, repetitions, epochs);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
