// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The stargml Authors

#pragma once

#include <numbers>
#include <utility>

#include "stargml/core_model.hpp"

namespace stargml {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Gain of the sigmoid phase-step regulator; output range is (0, lambda).
struct RegulatorConfig {
  double lambda = kTwoPi;
};

/// Scale W onto the power sphere trace(W^H W) = p_max.
/// Throws DegenerateInputError for an all-zero W.
CMatrix normalize_power(const CMatrix& W, double p_max);

/// Per-element projection onto beta_t^2 + beta_r^2 = 1. Equivalent to the
/// dense (A^T A + Abar^T Abar)^{-1/2} A form for diagonal A, in O(N).
/// Signs are preserved. Throws DegenerateInputError on a zero pair.
std::pair<RVector, RVector> normalize_amplitudes(const RVector& beta_t_raw,
                                                 const RVector& beta_r_raw);

/// lambda * sigmoid(x), elementwise.
RVector regulate_phase_delta(const RVector& delta_raw,
                             const RegulatorConfig& reg = {});

/// Wrap an angle into [0, 2pi).
double wrap_phase(double angle);

/// (theta + delta) mod 2pi, elementwise.
RVector apply_phase_delta(const RVector& theta, const RVector& delta_reg);

/// Closest point (in squared Euclidean distance on the raw reals) with
/// theta_t_aux - theta_r_aux in {+pi/2, -pi/2, +3pi/2, -3pi/2}. Ties keep the
/// first candidate in that order.
CoupledAuxiliary project_coupled_phases(const RVector& theta_t,
                                        const RVector& theta_r);

/// |cos(theta_t - theta_r)| per element.
RVector coupling_residual(const RVector& theta_t, const RVector& theta_r);

/// ||theta - project_coupled_phases(theta)||^2 over all 2N coordinates.
double coupling_penalty(const RVector& theta_t, const RVector& theta_r);

}  // namespace stargml
