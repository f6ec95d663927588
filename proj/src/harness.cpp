// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The stargml Authors

#include "stargml/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "stargml/baselines.hpp"
#include "stargml/channels.hpp"
#include "stargml/errors.hpp"

namespace stargml {

using nlohmann::json;

namespace {

constexpr std::uint64_t kChannelStream = 0x6368616eULL;

const std::vector<std::pair<ExperimentKind, const char*>> kKindNames = {
    {ExperimentKind::convergence, "convergence"},
    {ExperimentKind::sweep_n, "sweep_n"},
    {ExperimentKind::sweep_pmax, "sweep_pmax"},
    {ExperimentKind::sweep_mn, "sweep_mn"},
    {ExperimentKind::timing, "timing"},
    {ExperimentKind::phase_trace, "phase_trace"},
    {ExperimentKind::grad_check, "grad_check"},
};

const std::vector<std::pair<Scheme, const char*>> kSchemeNames = {
    {Scheme::gml_independent, "gml_independent"},
    {Scheme::gml_coupled, "gml_coupled"},
    {Scheme::random_phase, "random_phase"},
    {Scheme::conventional_ris, "conventional_ris"},
    {Scheme::pga_oracle, "pga_oracle"},
};

double elapsed_seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since)
      .count();
}

std::string format_value(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  return os;
}

void close_csv(std::ofstream& os, const std::filesystem::path& path) {
  os.close();
  if (!os) throw std::runtime_error("write failed for " + path.string());
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

bool is_sweep(ExperimentKind kind) {
  return kind == ExperimentKind::sweep_n || kind == ExperimentKind::sweep_pmax ||
         kind == ExperimentKind::sweep_mn;
}

/// Applies grid point `g` of the experiment to a copy of the base configuration.
RunConfig cell_config(const ExperimentSpec& spec, std::size_t g,
                      std::string& label) {
  RunConfig cfg = spec.base;
  switch (spec.kind) {
    case ExperimentKind::sweep_n:
      cfg.system.N = static_cast<std::size_t>(spec.grid[g]);
      label = format_value(spec.grid[g]);
      break;
    case ExperimentKind::sweep_pmax:
      cfg.system.p_max = dbm_to_watts(spec.grid[g]);
      label = format_value(spec.grid[g]);
      break;
    case ExperimentKind::sweep_mn:
      cfg.system.M = spec.grid_mn[g].first;
      cfg.system.N = spec.grid_mn[g].second;
      label = std::to_string(cfg.system.M) + "x" + std::to_string(cfg.system.N);
      break;
    default:
      label = std::to_string(cfg.system.N);
      break;
  }
  return cfg;
}

CellRecord run_cell(const ExperimentSpec& spec, Scheme scheme, std::size_t g,
                    std::size_t sample) {
  CellRecord rec;
  rec.scheme = scheme;
  rec.grid_index = g;
  rec.sample = sample;
  try {
    RunConfig cfg = cell_config(spec, g, rec.grid_value);
    cfg.train.seed = derive_seed(spec.master_seed,
                                 1 + static_cast<std::uint64_t>(scheme), g, sample);
    cfg.validate();
    std::mt19937_64 channel_rng(
        derive_seed(spec.master_seed, kChannelStream, g, sample));
    const ChannelSet ch = generate_channels(cfg.system, cfg.channel, channel_rng);
    const auto start = std::chrono::steady_clock::now();
    Solution sol = run_scheme(scheme, cfg, ch, spec.pga_steps);
    rec.seconds = elapsed_seconds(start);
    rec.wsr_final = sol.wsr_opt;
    if (!sol.trace.empty()) {
      rec.coupling_residual = sol.trace.back().max_coupling_residual;
    }
    rec.trace = std::move(sol.trace);
  } catch (const std::exception& e) {
    rec.failed = true;
    rec.error = e.what();
  }
  return rec;
}

std::vector<CellRecord> run_cells(const ExperimentSpec& spec) {
  const std::size_t grid = spec.grid_size();
  const std::size_t total = spec.schemes.size() * grid * spec.samples;
  std::vector<CellRecord> records(total);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < total; i = next++) {
      const std::size_t sample = i % spec.samples;
      const std::size_t g = (i / spec.samples) % grid;
      const Scheme scheme = spec.schemes[i / (spec.samples * grid)];
      records[i] = run_cell(spec, scheme, g, sample);
    }
  };
  std::size_t threads = spec.threads;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, total);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return records;
}

std::string cell_stem(const CellRecord& rec) {
  return to_string(rec.scheme) + "_g" + std::to_string(rec.grid_index) + "_s" +
         std::to_string(rec.sample);
}

void write_records(const std::filesystem::path& path,
                   const std::vector<CellRecord>& records) {
  auto os = open_csv(path);
  os << kSweepHeader << '\n';
  for (const auto& r : records) {
    if (r.failed) continue;
    os << to_string(r.scheme) << ',' << r.grid_value << ',' << r.sample << ','
       << r.wsr_final << ',' << r.seconds << '\n';
  }
  close_csv(os, path);
}

void write_aggregates(const std::filesystem::path& path,
                      const std::vector<AggregateRow>& rows) {
  auto os = open_csv(path);
  os << kAggregateHeader << '\n';
  for (const auto& a : rows) {
    os << to_string(a.scheme) << ',' << a.grid_value << ',' << a.count << ','
       << a.mean_wsr << ',' << a.std_wsr << ',' << a.mean_seconds << '\n';
  }
  close_csv(os, path);
}

void write_convergence(const std::filesystem::path& path, const CellRecord& r) {
  auto os = open_csv(path);
  os << kConvergenceHeader << '\n';
  for (const auto& e : r.trace) {
    os << e.epoch << ',' << e.wsr_best << ',' << e.wsr_current << ','
       << e.penalty << ',' << e.rho << '\n';
  }
  close_csv(os, path);
}

void write_phase_trace(const std::filesystem::path& path, const CellRecord& r) {
  auto os = open_csv(path);
  const Eigen::Index n =
      r.trace.empty() ? 0 : r.trace.front().phase_difference.size();
  os << kPhaseTraceHeaderPrefix;
  for (Eigen::Index i = 0; i < n; ++i) os << ",elem_" << i;
  os << '\n';
  for (const auto& e : r.trace) {
    os << e.epoch;
    for (Eigen::Index i = 0; i < n; ++i) os << ',' << e.phase_difference(i);
    os << '\n';
  }
  close_csv(os, path);
}

void run_timing(const ExperimentSpec& spec, ExperimentReport& report,
                const std::filesystem::path& dir) {
  for (const auto& [M, N] : spec.grid_mn) {
    SystemConfig sys = spec.base.system;
    sys.M = M;
    sys.N = N;
    const TimingResult t =
        timing_probe(sys, spec.base.train, spec.repetitions, spec.base.channel);
    report.timing.push_back({M, N, sys.K, t.median_s_per_epoch, t.min_s_per_epoch});
  }
  const auto path = dir / "timing.csv";
  auto os = open_csv(path);
  os << kTimingHeader << '\n';
  for (const auto& t : report.timing) {
    os << t.M << ',' << t.N << ',' << t.K << ',' << t.median_s_per_epoch << ','
       << t.min_s_per_epoch << '\n';
  }
  close_csv(os, path);
  report.files.push_back(path.string());
}

void run_grad_check_kind(const ExperimentSpec& spec, ExperimentReport& report,
                         const std::filesystem::path& dir) {
  GradCheckOptions opts;
  opts.instances = spec.samples;
  opts.seed = spec.master_seed;
  const GradCheckReport r = grad_check(opts);
  const auto path = dir / "grad_check.csv";
  auto os = open_csv(path);
  os << "block,max_rel_error\n"
     << "w," << r.max_rel_w << "\nbeta," << r.max_rel_beta << "\ntheta,"
     << r.max_rel_theta << '\n';
  close_csv(os, path);
  report.files.push_back(path.string());
  report.any_failed = !r.passed;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::string to_string(Scheme scheme) {
  for (const auto& [s, name] : kSchemeNames) {
    if (s == scheme) return name;
  }
  return "unknown";
}

ExperimentKind parse_experiment_kind(const std::string& name) {
  for (const auto& [k, n] : kKindNames) {
    if (name == n) return k;
  }
  throw ConfigError("unknown experiment kind '" + name + "'");
}

Scheme parse_scheme(const std::string& name) {
  for (const auto& [s, n] : kSchemeNames) {
    if (name == n) return s;
  }
  throw ConfigError("unknown scheme '" + name + "'");
}

std::size_t ExperimentSpec::grid_size() const {
  switch (kind) {
    case ExperimentKind::sweep_n:
    case ExperimentKind::sweep_pmax:
      return grid.size();
    case ExperimentKind::sweep_mn:
    case ExperimentKind::timing:
      return grid_mn.size();
    default:
      return 1;
  }
}

void ExperimentSpec::validate() const {
  if (samples < 1) throw ConfigError("experiment needs at least one sample");
  if (grid_size() == 0) throw ConfigError("experiment grid is empty");
  if (schemes.empty()) throw ConfigError("experiment scheme list is empty");
  if (kind == ExperimentKind::timing && repetitions < 3) {
    throw ConfigError("timing needs at least 3 repetitions");
  }
  for (double v : grid) {
    if (!std::isfinite(v)) throw ConfigError("grid values must be finite");
    if (kind == ExperimentKind::sweep_n && (v < 1 || v != std::floor(v))) {
      throw ConfigError("sweep_n grid values must be positive integers");
    }
  }
  for (const auto& [M, N] : grid_mn) {
    if (M == 0 || N == 0) throw ConfigError("grid_mn entries must be positive");
  }
  base.validate();
}

ExperimentSpec parse_experiment_spec(const json& doc) {
  ExperimentSpec spec;
  try {
    if (!doc.is_object()) throw ConfigError("experiment spec must be an object");
    for (const auto& item : doc.items()) {
      static const char* known[] = {"kind",  "samples", "schemes",   "grid",
                                    "grid_mn", "scale", "config",    "out",
                                    "seed",  "threads", "repetitions", "pga_steps"};
      if (std::find_if(std::begin(known), std::end(known), [&](const char* k) {
            return item.key() == k;
          }) == std::end(known)) {
        throw ConfigError("unknown experiment key '" + item.key() + "'");
      }
    }
    spec.kind = parse_experiment_kind(doc.at("kind").get<std::string>());
    if (doc.contains("scale")) {
      const auto scale = doc.at("scale").get<std::string>();
      if (scale == "paper") {
        spec.base = paper_run_config();
        spec.samples = 100;
      } else if (scale != "desk") {
        throw ConfigError("scale must be 'desk' or 'paper'");
      }
    }
    if (doc.contains("config")) spec.base = parse_run_config(doc.at("config"), spec.base);
    if (doc.contains("samples")) {
      const auto n = doc.at("samples").get<long long>();
      if (n < 1) throw ConfigError("samples must be positive");
      spec.samples = static_cast<std::size_t>(n);
    }
    if (doc.contains("schemes")) {
      spec.schemes.clear();
      for (const auto& s : doc.at("schemes").get<std::vector<std::string>>()) {
        spec.schemes.push_back(parse_scheme(s));
      }
    } else if (spec.kind == ExperimentKind::phase_trace) {
      spec.schemes = {Scheme::gml_coupled};
    }
    if (doc.contains("grid")) spec.grid = doc.at("grid").get<std::vector<double>>();
    if (doc.contains("grid_mn")) {
      for (const auto& p : doc.at("grid_mn")) {
        const auto mn = p.get<std::vector<std::size_t>>();
        if (mn.size() != 2) throw ConfigError("grid_mn entries must be [M, N]");
        spec.grid_mn.emplace_back(mn[0], mn[1]);
      }
    }
    if (doc.contains("out")) spec.out_dir = doc.at("out").get<std::string>();
    if (doc.contains("seed")) spec.master_seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("threads")) spec.threads = doc.at("threads").get<std::size_t>();
    if (doc.contains("repetitions")) {
      spec.repetitions = doc.at("repetitions").get<std::size_t>();
    }
    if (doc.contains("pga_steps")) spec.pga_steps = doc.at("pga_steps").get<std::size_t>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed experiment spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

ExperimentSpec load_experiment_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open experiment spec " + path);
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_experiment_spec(doc);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                          std::uint64_t b, std::uint64_t c) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(master), hi(master), lo(a), hi(a),
                    lo(b),      hi(b),      lo(c), hi(c)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

Solution run_scheme(Scheme scheme, const RunConfig& cfg, const ChannelSet& ch,
                    std::size_t pga_steps) {
  TrainConfig train = cfg.train;
  switch (scheme) {
    case Scheme::gml_independent:
      train.mode = PhaseModel::independent;
      return run_gml(cfg.system, ch, train);
    case Scheme::gml_coupled:
      train.mode = PhaseModel::coupled;
      return run_gml(cfg.system, ch, train);
    case Scheme::random_phase:
      return random_phase_baseline(cfg.system, ch, train);
    case Scheme::conventional_ris:
      return conventional_ris_baseline(cfg.system, ch, train);
    case Scheme::pga_oracle:
      return pga_oracle(cfg.system, ch, pga_steps, {}, train.seed);
  }
  throw ConfigError("unknown scheme");
}

std::vector<AggregateRow> aggregate(const std::vector<CellRecord>& records) {
  std::map<std::pair<int, std::size_t>, std::vector<const CellRecord*>> groups;
  for (const auto& r : records) {
    if (!r.failed) groups[{static_cast<int>(r.scheme), r.grid_index}].push_back(&r);
  }
  std::vector<AggregateRow> rows;
  for (const auto& [key, members] : groups) {
    AggregateRow a;
    a.scheme = members.front()->scheme;
    a.grid_value = members.front()->grid_value;
    a.count = members.size();
    for (const auto* r : members) {
      a.mean_wsr += r->wsr_final;
      a.mean_seconds += r->seconds;
    }
    a.mean_wsr /= static_cast<double>(a.count);
    a.mean_seconds /= static_cast<double>(a.count);
    if (a.count > 1) {
      double ss = 0.0;
      for (const auto* r : members) ss += (r->wsr_final - a.mean_wsr) * (r->wsr_final - a.mean_wsr);
      a.std_wsr = std::sqrt(ss / static_cast<double>(a.count - 1));
    }
    rows.push_back(a);
  }
  return rows;
}

ExperimentReport run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const std::filesystem::path dir(spec.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());

  ExperimentReport report;
  if (spec.kind == ExperimentKind::timing) {
    run_timing(spec, report, dir);
    return report;
  }
  if (spec.kind == ExperimentKind::grad_check) {
    run_grad_check_kind(spec, report, dir);
    return report;
  }

  report.records = run_cells(spec);
  report.aggregates = aggregate(report.records);
  for (const auto& r : report.records) report.any_failed = report.any_failed || r.failed;

  const std::string kind = to_string(spec.kind);
  if (is_sweep(spec.kind)) {
    const auto raw = dir / (kind + ".csv");
    write_records(raw, report.records);
    report.files.push_back(raw.string());
    const auto agg = dir / (kind + "_aggregate.csv");
    write_aggregates(agg, report.aggregates);
    report.files.push_back(agg.string());
    return report;
  }
  for (const auto& r : report.records) {
    if (r.failed) continue;
    const auto path = dir / (kind + "_" + cell_stem(r) + ".csv");
    if (spec.kind == ExperimentKind::phase_trace) {
      write_phase_trace(path, r);
    } else {
      write_convergence(path, r);
    }
    report.files.push_back(path.string());
  }
  const auto summary = dir / (kind + "_summary.csv");
  write_records(summary, report.records);
  report.files.push_back(summary.string());
  return report;
}

TimingResult timing_probe(const SystemConfig& sys, const TrainConfig& train,
                          std::size_t repetitions, const ChannelConfig& channel) {
  if (repetitions < 3) throw ConfigError("timing needs at least 3 repetitions");
  sys.validate();
  train.validate();
  std::mt19937_64 rng(channel.seed);
  const ChannelSet ch = generate_channels(sys, channel, rng);
  const double epochs = static_cast<double>(train.n_epochs);

  (void)run_gml(sys, ch, train);  // warm-up, not measured
  TimingResult out;
  for (std::size_t r = 0; r < repetitions; ++r) {
    const auto start = std::chrono::steady_clock::now();
    const Solution sol = run_gml(sys, ch, train);
    out.per_epoch.push_back(elapsed_seconds(start) / epochs);
    if (!std::isfinite(sol.wsr_opt)) throw GmlRunError("timing run diverged");
  }
  out.median_s_per_epoch = median(out.per_epoch);
  out.min_s_per_epoch = *std::min_element(out.per_epoch.begin(), out.per_epoch.end());
  return out;
}

GradCheckReport grad_check(const GradCheckOptions& opts,
                           const GradientProvider& provider) {
  GradCheckReport report;
  std::mt19937_64 rng(opts.seed);
  std::uniform_int_distribution<std::size_t> pick_m(1, 8), pick_n(1, 16),
      pick_k(1, 4);
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  auto cn = [&] { return cdouble(gauss(rng), gauss(rng)); };

  bool ok = true;
  auto compare = [&](const RVector& a, const RVector& fd, double& worst_rel) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      const double err = std::abs(a(i) - fd(i));
      if (!std::isfinite(a(i))) {
        ok = false;
        worst_rel = std::numeric_limits<double>::infinity();
      } else if (std::abs(fd(i)) < opts.small_cutoff) {
        report.max_abs_small = std::max(report.max_abs_small, err);
        ok = ok && err < opts.abs_tol;
      } else {
        const double rel = err / std::abs(fd(i));
        worst_rel = std::max(worst_rel, rel);
        ok = ok && rel < opts.rel_tol;
      }
    }
  };
  auto flat = [](const RMatrix& m) {
    return RVector(Eigen::Map<const RVector>(m.data(), m.size()));
  };

  for (std::size_t i = 0; i < opts.instances; ++i) {
    const std::size_t M = pick_m(rng), N = pick_n(rng), K = pick_k(rng);
    const SystemConfig sys = SystemConfig::make(M, N, K, 1.0, 0.1);
    ChannelSet ch;
    ch.G.resize(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(M));
    for (Eigen::Index c = 0; c < ch.G.size(); ++c) ch.G.data()[c] = cn();
    for (std::size_t k = 0; k < K; ++k) {
      CVector h(static_cast<Eigen::Index>(N));
      for (Eigen::Index n = 0; n < h.size(); ++n) h(n) = cn();
      ch.h.push_back(h);
    }
    BeamformingState s = random_initial_state(sys, rng);
    for (Eigen::Index n = 0; n < s.beta_t.size(); ++n) {
      const double split = angle(rng);
      s.beta_t(n) = std::abs(std::cos(split));
      s.beta_r(n) = std::abs(std::sin(split));
    }
    const GradientBundle a = provider(sys, ch, s);
    const GradientBundle fd = finite_diff_gradient(
        [&](const BeamformingState& x) { return reference_wsr(sys, ch, x); }, s,
        opts.step);
    compare(flat(real_coordinates(a.grad_w)), flat(real_coordinates(fd.grad_w)),
            report.max_rel_w);
    compare(a.grad_beta, fd.grad_beta, report.max_rel_beta);
    compare(a.grad_theta, fd.grad_theta, report.max_rel_theta);
    ++report.instances;
  }
  report.passed = ok;
  return report;
}

int grad_check_command(const GradCheckOptions& opts, std::ostream& out,
                       const GradientProvider& provider) {
  const GradCheckReport r = grad_check(opts, provider);
  const auto old = out.precision(3);
  out << std::scientific << "instances: " << r.instances << '\n'
      << "max rel err W:     " << r.max_rel_w << '\n'
      << "max rel err beta:  " << r.max_rel_beta << '\n'
      << "max rel err theta: " << r.max_rel_theta << '\n'
      << "max abs err (|FD| < " << opts.small_cutoff << "): " << r.max_abs_small
      << '\n';
  out << (r.passed ? "PASS" : "FAIL") << ": max rel err "
      << (r.passed ? "< " : ">= ") << opts.rel_tol << '\n';
  out.precision(old);
  out.unsetf(std::ios::floatfield);
  return r.passed ? 0 : 1;
}

}  // namespace stargml
