// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The stargml Authors

#include "stargml/baselines.hpp"

#include <cmath>
#include <algorithm>
#include <random>
#include <tuple>

#include "stargml/constraints.hpp"
#include "stargml/errors.hpp"
#include "stargml/gradients.hpp"

namespace stargml {

Solution random_phase_baseline(const SystemConfig& sys, const ChannelSet& ch,
                               const TrainConfig& train) {
  TrainConfig frozen = train;
  frozen.mode = PhaseModel::independent;
  frozen.train_amplitudes = false;
  frozen.train_phases = false;
  return run_gml(sys, ch, frozen, make_setup(sys, frozen));
}

Solution conventional_ris_baseline(const SystemConfig& sys,
                                   const ChannelSet& ch,
                                   const TrainConfig& train) {
  if (sys.N % 2 != 0) {
    throw ConfigError("conventional RIS split needs an even element count");
  }
  TrainConfig frozen = train;
  frozen.mode = PhaseModel::independent;
  frozen.train_amplitudes = false;
  GmlSetup setup = make_setup(sys, frozen);
  const auto half = static_cast<Eigen::Index>(sys.N / 2);
  const auto N = static_cast<Eigen::Index>(sys.N);
  setup.initial.beta_t = RVector::Zero(N);
  setup.initial.beta_r = RVector::Zero(N);
  setup.initial.beta_r.head(half).setOnes();
  setup.initial.beta_t.tail(N - half).setOnes();
  return run_gml(sys, ch, frozen, std::move(setup));
}

namespace {

double max_abs(const RVector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

Solution pga_oracle(const SystemConfig& sys, const ChannelSet& ch,
                    std::size_t steps, const PgaStepSizes& step_sizes,
                    std::uint64_t seed) {
  sys.validate();
  if (!(step_sizes.w > 0.0) || !(step_sizes.beta > 0.0) ||
      !(step_sizes.theta > 0.0)) {
    throw ConfigError("PGA step sizes must be positive");
  }
  std::mt19937_64 rng(seed);
  BeamformingState x = random_initial_state(sys, rng);
  check_dimensions(sys, ch, x);
  double value = evaluate_wsr(sys, ch, x);
  double scale = 1.0;
  const auto N = static_cast<Eigen::Index>(sys.N);

  Solution sol;
  for (std::size_t it = 1; it <= steps; ++it) {
    const GradientBundle g = wsr_gradients(sys, ch, x);
    const double gw = g.grad_w.norm();
    const double gb = max_abs(g.grad_beta);
    const double gt = max_abs(g.grad_theta);
    bool accepted = false;
    for (int attempt = 0; attempt < 40 && !accepted; ++attempt) {
      BeamformingState trial = x;
      if (gw > 0.0) {
        trial.W = normalize_power(
            x.W + (scale * step_sizes.w * x.W.norm() / gw) * g.grad_w, sys.p_max);
      }
      if (gb > 0.0) {
        const RVector b = x.beta() + (scale * step_sizes.beta / gb) * g.grad_beta;
        std::tie(trial.beta_t, trial.beta_r) =
            normalize_amplitudes(b.head(N), b.tail(N));
      }
      if (gt > 0.0) {
        trial.set_theta(
            (x.theta() + (scale * step_sizes.theta / gt) * g.grad_theta)
                .unaryExpr(&wrap_phase));
      }
      const double trial_value = evaluate_wsr(sys, ch, trial);
      if (trial_value > value) {
        x = std::move(trial);
        value = trial_value;
        accepted = true;
        scale = std::min(2.0 * scale, 1.0);
      } else {
        scale *= 0.5;
      }
    }

    EpochRecord rec;
    rec.epoch = it;
    rec.wsr_best = value;
    rec.wsr_current = value;
    rec.penalty = coupling_penalty(x.theta_t, x.theta_r);
    rec.power_error = std::abs(x.W.squaredNorm() - sys.p_max) / sys.p_max;
    rec.amplitude_error =
        ((x.beta_t.cwiseAbs2() + x.beta_r.cwiseAbs2()).array() - 1.0).abs().maxCoeff();
    rec.max_coupling_residual = coupling_residual(x.theta_t, x.theta_r).maxCoeff();
    rec.phase_difference = (x.theta_t - x.theta_r).unaryExpr(&wrap_phase);
    sol.trace.push_back(std::move(rec));
    if (!accepted) break;
  }

  sol.W_opt = x.W;
  sol.beta_opt = x.beta();
  sol.theta_opt = x.theta();
  sol.theta_unprojected = sol.theta_opt;
  sol.wsr_opt = value;
  sol.wsr_unprojected = value;
  sol.residual_unprojected = coupling_residual(x.theta_t, x.theta_r).maxCoeff();
  sol.feasible_coupled = sol.residual_unprojected < 1e-9;
  return sol;
}

}  // namespace stargml
