// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The stargml Authors

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "stargml/errors.hpp"
#include "stargml/harness.hpp"

using namespace stargml;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("stargml_harness_" + name);
  fs::remove_all(dir);
  return dir;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::string first_line(const fs::path& path) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  return line;
}

ExperimentSpec small_spec(ExperimentKind kind, const std::string& dir) {
  ExperimentSpec s;
  s.kind = kind;
  s.samples = 3;
  s.base.train.n_epochs = 20;
  s.out_dir = dir;
  s.master_seed = 42;
  s.pga_steps = 30;
  return s;
}

}  // namespace

TEST_CASE("names round trip") {
  for (auto k : {ExperimentKind::convergence, ExperimentKind::sweep_n, ExperimentKind::sweep_pmax,
                 ExperimentKind::sweep_mn, ExperimentKind::timing, ExperimentKind::phase_trace,
                 ExperimentKind::grad_check}) {
    CHECK(parse_experiment_kind(to_string(k)) == k);
  }
  for (auto s : {Scheme::gml_independent, Scheme::gml_coupled, Scheme::random_phase,
                 Scheme::conventional_ris, Scheme::pga_oracle}) {
    CHECK(parse_scheme(to_string(s)) == s);
  }
  CHECK_THROWS_AS(parse_scheme("ao"), ConfigError);
  CHECK_THROWS_AS(parse_experiment_kind("sweep_k"), ConfigError);
}

TEST_CASE("spec validation and parsing") {
  ExperimentSpec s;
  s.samples = 0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = {};
  s.schemes.clear();
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = {};
  s.kind = ExperimentKind::sweep_n;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s.grid = {8, 16};
  CHECK_NOTHROW(s.validate());
  CHECK(s.grid_size() == 2);

  const auto p = parse_experiment_spec(nlohmann::json::parse(
      R"({"kind": "sweep_mn", "samples": 4, "schemes": ["random_phase"],
          "grid_mn": [[8, 16], [16, 32]], "config": {"train": {"n_epochs": 9}},
          "seed": 5, "out": "x"})"));
  CHECK(p.kind == ExperimentKind::sweep_mn);
  CHECK(p.samples == 4);
  CHECK(p.grid_size() == 2);
  CHECK(p.grid_mn[1] == std::pair<std::size_t, std::size_t>{16, 32});
  CHECK(p.base.train.n_epochs == 9);
  CHECK(p.master_seed == 5);
  CHECK(parse_experiment_spec(nlohmann::json::parse(R"({"kind": "convergence", "scale": "paper"})"))
            .samples == 100);
  for (const char* bad : {R"({"samples": 3})", R"({"kind": "sweep_n"})",
                          R"({"kind": "convergence", "samples": 0})",
                          R"({"kind": "convergence", "scale": "huge"})",
                          R"({"kind": "convergence", "schemes": ["ao"]})",
                          R"({"kind": "sweep_mn", "grid_mn": [[8]]})"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(parse_experiment_spec(nlohmann::json::parse(bad)), ConfigError);
  }
  CHECK_THROWS_AS(load_experiment_spec("/nonexistent/spec.json"), ConfigError);
}

TEST_CASE("derive_seed separates streams") {
  CHECK(derive_seed(1, 2, 3, 4) == derive_seed(1, 2, 3, 4));
  CHECK(derive_seed(1, 2, 3, 4) != derive_seed(1, 2, 3, 5));
  CHECK(derive_seed(1, 2, 3, 4) != derive_seed(1, 2, 4, 3));
  CHECK(derive_seed(0, 0, 0, 0) != derive_seed(1ULL << 32, 0, 0, 0));
}

TEST_CASE("convergence: 2 schemes x 3 samples give 6 traces and 1 summary") {
  const fs::path dir = fresh_dir("convergence");
  ExperimentSpec spec = small_spec(ExperimentKind::convergence, dir.string());
  spec.schemes = {Scheme::gml_independent, Scheme::gml_coupled};
  const ExperimentReport r = run_experiment(spec);
  CHECK(r.records.size() == 6);
  CHECK_FALSE(r.any_failed);
  CHECK(r.files.size() == 7);
  std::size_t traces = 0, summaries = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name == "convergence_summary.csv") {
      ++summaries;
    } else {
      ++traces;
      CHECK(first_line(entry.path()) == kConvergenceHeader);
      CHECK(read_csv(entry.path()).size() == 21);
    }
  }
  CHECK(traces == 6);
  CHECK(summaries == 1);
  CHECK(first_line(dir / "convergence_summary.csv") == kSweepHeader);
}

TEST_CASE("sweep: record count, headers and recomputable aggregates") {
  const fs::path dir = fresh_dir("sweep");
  ExperimentSpec spec = small_spec(ExperimentKind::sweep_n, dir.string());
  spec.schemes = {Scheme::gml_independent, Scheme::random_phase, Scheme::pga_oracle};
  spec.grid = {4, 8};
  const ExperimentReport r = run_experiment(spec);
  CHECK(r.records.size() == 3 * 2 * 3);
  CHECK_FALSE(r.any_failed);

  const auto raw = read_csv(dir / "sweep_n.csv");
  const auto agg = read_csv(dir / "sweep_n_aggregate.csv");
  REQUIRE(raw.size() == 19);
  CHECK(first_line(dir / "sweep_n.csv") == kSweepHeader);
  CHECK(first_line(dir / "sweep_n_aggregate.csv") == kAggregateHeader);

  // Recompute mean and sample std per (scheme, grid_value) from the raw file.
  std::map<std::pair<std::string, std::string>, std::vector<double>> groups;
  for (std::size_t i = 1; i < raw.size(); ++i) {
    REQUIRE(raw[i].size() == 5);
    groups[{raw[i][0], raw[i][1]}].push_back(std::stod(raw[i][3]));
  }
  REQUIRE(agg.size() == groups.size() + 1);
  for (std::size_t i = 1; i < agg.size(); ++i) {
    const auto& v = groups.at({agg[i][0], agg[i][1]});
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
    CHECK(std::stoul(agg[i][2]) == v.size());
    CHECK(std::stod(agg[i][3]) == doctest::Approx(mean).epsilon(1e-12));
    CHECK(std::stod(agg[i][4]) == doctest::Approx(sd).epsilon(1e-9));
  }
}

TEST_CASE("schemes of one cell share the channel draw") {
  ExperimentSpec spec = small_spec(ExperimentKind::sweep_pmax, fresh_dir("pairing").string());
  spec.schemes = {Scheme::random_phase, Scheme::random_phase};
  spec.grid = {30};
  spec.samples = 2;
  const ExperimentReport r = run_experiment(spec);
  REQUIRE(r.records.size() == 4);
  // Identical scheme, identical (grid, sample): identical result.
  CHECK(r.records[0].wsr_final == r.records[2].wsr_final);
  CHECK(r.records[1].wsr_final == r.records[3].wsr_final);
  CHECK(r.records[0].grid_value == "30");
}

TEST_CASE("master seed determines every non-timing field") {
  auto run = [](std::uint64_t seed, const std::string& name) {
    ExperimentSpec spec = small_spec(ExperimentKind::convergence, fresh_dir(name).string());
    spec.schemes = {Scheme::gml_coupled, Scheme::conventional_ris};
    spec.samples = 2;
    spec.master_seed = seed;
    return run_experiment(spec);
  };
  const auto a = run(7, "det_a");
  const auto b = run(7, "det_b");
  const auto c = run(8, "det_c");
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].wsr_final == b.records[i].wsr_final);
    CHECK(a.records[i].coupling_residual == b.records[i].coupling_residual);
    REQUIRE(a.records[i].trace.size() == b.records[i].trace.size());
    for (std::size_t e = 0; e < a.records[i].trace.size(); ++e) {
      CHECK(a.records[i].trace[e].wsr_best == b.records[i].trace[e].wsr_best);
      CHECK(a.records[i].trace[e].phase_difference == b.records[i].trace[e].phase_difference);
    }
  }
  CHECK(a.records[0].wsr_final != c.records[0].wsr_final);
}

TEST_CASE("per-cell failures are recorded, not thrown") {
  ExperimentSpec spec = small_spec(ExperimentKind::sweep_n, fresh_dir("failure").string());
  spec.schemes = {Scheme::conventional_ris, Scheme::random_phase};
  spec.grid = {5, 6};
  spec.samples = 1;
  const ExperimentReport r = run_experiment(spec);
  REQUIRE(r.records.size() == 4);
  CHECK(r.any_failed);
  CHECK(r.records[0].failed);  // conventional_ris, N = 5
  CHECK(r.records[0].error.find("even") != std::string::npos);
  CHECK_FALSE(r.records[1].failed);
  CHECK_FALSE(r.records[2].failed);
  CHECK_FALSE(r.records[3].failed);
}

TEST_CASE("unwritable output directory names the path") {
  ExperimentSpec spec = small_spec(ExperimentKind::convergence, "/proc/stargml_forbidden/out");
  spec.samples = 1;
  try {
    run_experiment(spec);
    FAIL("expected an I/O error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("/proc/stargml_forbidden") != std::string::npos);
  }
}

TEST_CASE("phase_trace: coupled differences settle near pi/2 and 3pi/2") {
  const fs::path dir = fresh_dir("phase");
  ExperimentSpec spec = small_spec(ExperimentKind::phase_trace, dir.string());
  spec.schemes = {Scheme::gml_coupled};
  spec.base.train.n_epochs = 300;
  spec.samples = 1;
  const ExperimentReport r = run_experiment(spec);
  REQUIRE(r.records.size() == 1);
  REQUIRE(r.files.size() == 2);
  const auto rows = read_csv(r.files[0]);
  REQUIRE(rows.size() == 301);
  REQUIRE(rows[0].size() == 17);
  CHECK(rows[0][0] == "epoch");
  CHECK(rows[0][1] == "elem_0");
  CHECK(rows[0][16] == "elem_15");
  for (std::size_t n = 1; n <= 16; ++n) {
    const double d = std::stod(rows.back()[n]);
    CHECK(d >= 0.0);
    CHECK(d < 2 * kPi);
    CHECK(std::min(std::abs(d - kPi / 2), std::abs(d - 3 * kPi / 2)) < 0.08);
  }
}

TEST_CASE("timing") {
  SystemConfig sys = SystemConfig::make(4, 8, 2, 1.0, 0.1);
  TrainConfig train;
  train.n_epochs = 5;
  CHECK_THROWS_AS(timing_probe(sys, train, 2), ConfigError);
  const TimingResult t = timing_probe(sys, train, 3);
  CHECK(t.per_epoch.size() == 3);
  CHECK(t.min_s_per_epoch > 0.0);
  CHECK(t.min_s_per_epoch <= t.median_s_per_epoch);

  const fs::path dir = fresh_dir("timing");
  ExperimentSpec spec = small_spec(ExperimentKind::timing, dir.string());
  spec.grid_mn = {{4, 8}, {8, 8}, {16, 8}};
  spec.base.train.n_epochs = 5;
  const ExperimentReport r = run_experiment(spec);
  CHECK(r.timing.size() == 3);
  const auto rows = read_csv(dir / "timing.csv");
  CHECK(first_line(dir / "timing.csv") == kTimingHeader);
  CHECK(rows.size() == 4);
  CHECK(rows[3][0] == "16");
}

TEST_CASE("grad_check passes and is seed-pinned") {
  GradCheckOptions opts;
  opts.instances = 10;
  opts.seed = 3;
  const GradCheckReport a = grad_check(opts);
  const GradCheckReport b = grad_check(opts);
  CHECK(a.passed);
  CHECK(a.instances == 10);
  CHECK(a.max_rel_w < 1e-6);
  CHECK(a.max_rel_w == b.max_rel_w);
  CHECK(a.max_rel_theta == b.max_rel_theta);
  std::ostringstream out;
  CHECK(grad_check_command(opts, out) == 0);
  CHECK(out.str().find("PASS: max rel err < 1.000e-06") != std::string::npos);
}

TEST_CASE("grad_check catches a sign-flipped gradient") {
  GradCheckOptions opts;
  opts.instances = 5;
  const GradientProvider flipped = [](const SystemConfig& c, const ChannelSet& ch,
                                      const BeamformingState& s) {
    GradientBundle g = wsr_gradients(c, ch, s);
    g.grad_theta = -g.grad_theta;
    return g;
  };
  std::ostringstream out;
  CHECK(grad_check_command(opts, out, flipped) != 0);
  CHECK(out.str().find("FAIL") != std::string::npos);
  CHECK_FALSE(grad_check(opts, flipped).passed);
}

TEST_CASE("grad_check experiment kind writes its table") {
  const fs::path dir = fresh_dir("gc");
  ExperimentSpec spec = small_spec(ExperimentKind::grad_check, dir.string());
  spec.samples = 4;
  const ExperimentReport r = run_experiment(spec);
  CHECK_FALSE(r.any_failed);
  CHECK(fs::exists(dir / "grad_check.csv"));
}
