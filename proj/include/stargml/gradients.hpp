// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The stargml Authors

#pragma once

#include <functional>

#include "stargml/core_model.hpp"

namespace stargml {

/// Gradients of the WSR with respect to every optimization variable.
///
/// grad_w follows the conjugate-Wirtinger convention: for a perturbation D,
/// d/dt R(W + tD) = 2 Re tr(grad_w^H D). Equivalently
/// grad_w = (dR/dRe(W) + j dR/dIm(W)) / 2.
/// grad_beta and grad_theta are plain partial derivatives, stacked (t, r).
struct GradientBundle {
  CMatrix grad_w;
  RVector grad_beta;
  RVector grad_theta;
};

/// All three gradients from one shared forward pass.
GradientBundle wsr_gradients(const SystemConfig& cfg, const ChannelSet& ch,
                             const BeamformingState& state);

CMatrix grad_wsr_precoder(const SystemConfig& cfg, const ChannelSet& ch,
                          const BeamformingState& state);
RVector grad_wsr_amplitudes(const SystemConfig& cfg, const ChannelSet& ch,
                            const BeamformingState& state);
RVector grad_wsr_phases(const SystemConfig& cfg, const ChannelSet& ch,
                        const BeamformingState& state);

/// Real coordinate view of a complex gradient: (dR/dRe, dR/dIm) = 2 grad_w.
RMatrix real_coordinates(const CMatrix& grad_w);

// --- verification oracle -------------------------------------------------

using StateObjective = std::function<long double(const BeamformingState&)>;

/// WSR evaluated in extended precision through the stacked 2N form. Used as
/// the objective for finite differences so that rounding noise stays well
/// below the step-size truncation error.
long double reference_wsr(const SystemConfig& cfg, const ChannelSet& ch,
                          const BeamformingState& state);

inline constexpr double kDefaultFdStep = 1e-6;

/// Central differences over all 2MK + 2N + 2N real coordinates, returned in
/// the same conventions as GradientBundle.
GradientBundle finite_diff_gradient(const StateObjective& objective,
                                    const BeamformingState& state,
                                    double step = kDefaultFdStep);

}  // namespace stargml
