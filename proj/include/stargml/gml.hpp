// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The stargml Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "stargml/constraints.hpp"
#include "stargml/core_model.hpp"
#include "stargml/networks.hpp"

namespace stargml {

enum class PhaseModel { independent, coupled };

/// Penalty weight grows geometrically from rho_min to rho_max over training.
struct PenaltySchedule {
  double rho_min = 1e-2;
  double rho_max = 1e2;
};

/// rho_min * (rho_max / rho_min)^(epoch / n_epochs).
double rho_at(const PenaltySchedule& schedule, std::size_t epoch,
              std::size_t n_epochs);

struct TrainConfig {
  std::size_t n_epochs = 500;
  std::size_t n_outer = 1;
  std::size_t n_inner = 1;
  double lr_w = 1e-3;
  double lr_a = 5e-3;
  double lr_theta = 5e-3;
  std::size_t n1 = 5;  ///< amplitude network update interval (epochs)
  std::size_t n2 = 5;  ///< phase network update interval (epochs)
  PhaseModel mode = PhaseModel::independent;
  PenaltySchedule penalty;
  RegulatorConfig regulator;
  std::uint64_t seed = 0;
  /// Baselines freeze amplitudes and/or phases by disabling their blocks.
  bool train_amplitudes = true;
  bool train_phases = true;
  PnInput pn_input = PnInput::split;

  void validate() const;
};

/// One row of the per-epoch trace, taken after the epoch's last outer
/// iteration.
struct EpochRecord {
  std::size_t epoch = 0;        ///< 1-based
  double wsr_best = 0.0;        ///< best-so-far tracked value
  double wsr_current = 0.0;     ///< R(W*, A*, Phi*)
  double wsr_projected = 0.0;   ///< R after hard coupled-phase projection
  double penalty = 0.0;         ///< ||theta - theta_aux||^2 (unweighted)
  double rho = 0.0;             ///< penalty weight used (0 if independent)
  double power_error = 0.0;     ///< |tr(W^H W) - p_max| / p_max
  double amplitude_error = 0.0; ///< max_n |beta_t^2 + beta_r^2 - 1|
  double max_coupling_residual = 0.0;
  RVector phase_difference;     ///< wrap(theta_t - theta_r), length N
};

struct Solution {
  CMatrix W_opt;
  RVector beta_opt;   ///< (beta_t, beta_r)
  RVector theta_opt;  ///< (theta_t, theta_r), projected in coupled mode
  double wsr_opt = 0.0;
  bool feasible_coupled = false;
  /// Coupled mode: the best state before projection and its residual.
  RVector theta_unprojected;
  double wsr_unprojected = 0.0;
  double residual_unprojected = 0.0;
  std::vector<EpochRecord> trace;

  BeamformingState state() const;
};

/// Feasible random start: complex Gaussian W scaled to p_max,
/// beta_t = beta_r = 1/sqrt(2), phases uniform on [0, 2pi).
BeamformingState random_initial_state(const SystemConfig& cfg,
                                      std::mt19937_64& rng);

/// Networks and variables drawn from one seeded stream, networks first.
struct GmlSetup {
  SubNetworks nets;
  BeamformingState initial;
};
GmlSetup make_setup(const SystemConfig& cfg, const TrainConfig& train);

// --- single blocks of the inner iteration ---------------------------------
//
// Each runs n_inner steps starting from the given state's target variable;
// the other variables are held fixed.

BeamformingState inner_update_precoder(const SubNetworks& nets,
                                       const BeamformingState& state,
                                       const ChannelSet& ch,
                                       const SystemConfig& cfg,
                                       std::size_t n_inner = 1);
BeamformingState inner_update_amplitudes(const SubNetworks& nets,
                                         const BeamformingState& state,
                                         const ChannelSet& ch,
                                         const SystemConfig& cfg,
                                         std::size_t n_inner = 1);
BeamformingState inner_update_phases(const SubNetworks& nets,
                                     const BeamformingState& state,
                                     const ChannelSet& ch,
                                     const SystemConfig& cfg,
                                     const RegulatorConfig& reg = {},
                                     std::size_t n_inner = 1);

/// -R; the loss of every network in independent mode and of PN/AN in
/// coupled mode.
double loss_independent(const SystemConfig& cfg, const ChannelSet& ch,
                        const BeamformingState& state);

/// -R + rho ||theta - theta_aux||^2 with theta_aux the exact coupled
/// projection of the current phases.
double loss_coupled_tn(const SystemConfig& cfg, const ChannelSet& ch,
                       const BeamformingState& state, double rho);

/// Result of one outer iteration: the three blocks, then the per-network
/// losses at the final (W*, A*, Phi*) and their gradients with respect to
/// each network's flat parameters.
struct OuterStep {
  BeamformingState result;
  RVector grad_precoder;
  RVector grad_amplitude;
  RVector grad_phase;
  double wsr = 0.0;
  double wsr_projected = 0.0;  ///< after hard coupled-phase projection
  double violation = 0.0;      ///< ||theta - theta_aux||^2
};

/// Each block restarts its own variable from `initial` while the others come
/// from the running state (`current`, then the outputs of earlier blocks).
/// rho weights the phase penalty in coupled mode. Failures are rethrown as
/// GmlRunError naming the inner step and block.
OuterStep outer_iteration(const SubNetworks& nets,
                          const BeamformingState& initial,
                          const BeamformingState& current, const ChannelSet& ch,
                          const SystemConfig& cfg, const TrainConfig& train,
                          double rho);

/// Full training run from a seeded setup.
Solution run_gml(const SystemConfig& cfg, const ChannelSet& ch,
                 const TrainConfig& train);

/// Full training run from explicit networks and initial variables.
Solution run_gml(const SystemConfig& cfg, const ChannelSet& ch,
                 const TrainConfig& train, GmlSetup setup);

}  // namespace stargml
