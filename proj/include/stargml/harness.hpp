// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The stargml Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "stargml/config_io.hpp"
#include "stargml/gradients.hpp"

namespace stargml {

enum class ExperimentKind {
  convergence,
  sweep_n,
  sweep_pmax,
  sweep_mn,
  timing,
  phase_trace,
  grad_check,
};

enum class Scheme {
  gml_independent,
  gml_coupled,
  random_phase,
  conventional_ris,
  pga_oracle,
};

std::string to_string(ExperimentKind kind);
std::string to_string(Scheme scheme);
ExperimentKind parse_experiment_kind(const std::string& name);
Scheme parse_scheme(const std::string& name);

/// One experiment. Grid meaning depends on the kind:
///   sweep_n     grid = element counts N
///   sweep_pmax  grid = transmit powers in dBm
///   sweep_mn, timing
///               grid_mn = (M, N) pairs
///   convergence, phase_trace
///               a single point at `base` (grid ignored)
struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::convergence;
  std::size_t samples = 20;
  std::vector<Scheme> schemes{Scheme::gml_independent};
  std::vector<double> grid;
  std::vector<std::pair<std::size_t, std::size_t>> grid_mn;
  RunConfig base = desk_run_config();
  std::string out_dir = "out";
  std::uint64_t master_seed = 0;
  std::size_t threads = 0;        ///< 0: hardware concurrency
  std::size_t repetitions = 3;    ///< timing only
  std::size_t pga_steps = 2000;

  /// Throws ConfigError when grids are empty, N_s is 0, or a scheme list
  /// is empty.
  void validate() const;
  std::size_t grid_size() const;
};

/// Experiment spec file (JSON):
///   {"kind": "sweep_n", "samples": 20,
///    "schemes": ["gml_independent", "random_phase"],
///    "grid": [8, 16, 32], "grid_mn": [[8, 16], [16, 16]],
///    "scale": "desk" | "paper", "config": { <run config overrides> },
///    "out": "results", "seed": 1, "threads": 0, "repetitions": 3,
///    "pga_steps": 2000}
ExperimentSpec parse_experiment_spec(const nlohmann::json& doc);
ExperimentSpec load_experiment_spec(const std::string& path);

struct CellRecord {
  Scheme scheme = Scheme::gml_independent;
  std::size_t grid_index = 0;
  std::string grid_value;  ///< as written to CSV ("16", "30", "8x16")
  std::size_t sample = 0;
  double wsr_final = 0.0;
  double seconds = 0.0;
  double coupling_residual = 0.0;  ///< max |cos(theta_t - theta_r)| at the end
  std::vector<EpochRecord> trace;
  bool failed = false;
  std::string error;
};

struct TimingRow {
  std::size_t M = 0;
  std::size_t N = 0;
  std::size_t K = 0;
  double median_s_per_epoch = 0.0;
  double min_s_per_epoch = 0.0;
};

struct AggregateRow {
  Scheme scheme = Scheme::gml_independent;
  std::string grid_value;
  std::size_t count = 0;
  double mean_wsr = 0.0;
  double std_wsr = 0.0;  ///< sample standard deviation (0 when count < 2)
  double mean_seconds = 0.0;
};

struct ExperimentReport {
  std::vector<CellRecord> records;  ///< scheme-major, then grid, then sample
  std::vector<AggregateRow> aggregates;
  std::vector<TimingRow> timing;
  std::vector<std::string> files;
  bool any_failed = false;
};

/// Seed of an independent stream for one cell. Schemes of the same
/// (grid, sample) share their channel stream so comparisons are paired.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                          std::uint64_t b, std::uint64_t c);

/// Runs one scheme on one channel realization.
Solution run_scheme(Scheme scheme, const RunConfig& cfg, const ChannelSet& ch,
                    std::size_t pga_steps);

/// Executes every (scheme, grid point, sample) cell on a work pool, writes
/// the CSV files under spec.out_dir and returns the records. Per-cell
/// failures are recorded, not thrown. I/O failures throw std::runtime_error
/// naming the path.
ExperimentReport run_experiment(const ExperimentSpec& spec);

std::vector<AggregateRow> aggregate(const std::vector<CellRecord>& records);

// CSV headers, exact.
inline constexpr const char* kConvergenceHeader = "epoch,wsr_best,wsr_current,penalty,rho";
inline constexpr const char* kSweepHeader = "scheme,grid_value,sample,wsr_final,seconds";
inline constexpr const char* kAggregateHeader =
    "scheme,grid_value,count,mean_wsr,std_wsr,mean_seconds";
inline constexpr const char* kTimingHeader =
    "M,N,K,median_s_per_epoch,min_s_per_epoch";
/// Followed by ",elem_0,...,elem_{N-1}".
inline constexpr const char* kPhaseTraceHeaderPrefix = "epoch";

// --- timing --------------------------------------------------------------

struct TimingResult {
  double median_s_per_epoch = 0.0;
  double min_s_per_epoch = 0.0;
  std::vector<double> per_epoch;  ///< one entry per measured repetition
};

/// One unmeasured warm-up run, then `repetitions` timed GML runs on a fixed
/// channel draw. Throws ConfigError for repetitions < 3.
TimingResult timing_probe(const SystemConfig& sys, const TrainConfig& train,
                          std::size_t repetitions,
                          const ChannelConfig& channel = {});

// --- gradient check ------------------------------------------------------

using GradientProvider = std::function<GradientBundle(
    const SystemConfig&, const ChannelSet&, const BeamformingState&)>;

struct GradCheckOptions {
  std::size_t instances = 50;
  std::uint64_t seed = 0;
  double step = kDefaultFdStep;
  double rel_tol = 1e-6;
  double abs_tol = 1e-9;       ///< used where |FD| < small_cutoff
  double small_cutoff = 1e-10;
};

struct GradCheckReport {
  double max_rel_w = 0.0;
  double max_rel_beta = 0.0;
  double max_rel_theta = 0.0;
  double max_abs_small = 0.0;  ///< worst |analytic - FD| where |FD| is tiny
  std::size_t instances = 0;
  bool passed = false;
};

/// Random instances with M <= 8, N <= 16, K <= 4 compared coordinate-wise
/// against central differences of reference_wsr.
GradCheckReport grad_check(const GradCheckOptions& opts,
                           const GradientProvider& provider = wsr_gradients);

/// grad_check plus a human-readable summary; returns the process exit code.
int grad_check_command(const GradCheckOptions& opts, std::ostream& out,
                       const GradientProvider& provider = wsr_gradients);

}  // namespace stargml
