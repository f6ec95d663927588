// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The stargml Authors

#include "stargml/constraints.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "stargml/errors.hpp"

namespace stargml {

CMatrix normalize_power(const CMatrix& W, double p_max) {
  const double power = W.squaredNorm();
  if (!(power > 0.0) || !std::isfinite(power)) {
    throw DegenerateInputError(
        "precoder has zero or non-finite power; re-initialize it");
  }
  return W * std::sqrt(p_max / power);
}

std::pair<RVector, RVector> normalize_amplitudes(const RVector& beta_t_raw,
                                                 const RVector& beta_r_raw) {
  if (beta_t_raw.size() != beta_r_raw.size()) {
    throw ConfigError("amplitude vectors differ in length");
  }
  RVector bt(beta_t_raw.size());
  RVector br(beta_r_raw.size());
  for (Eigen::Index n = 0; n < bt.size(); ++n) {
    const double r = std::hypot(beta_t_raw[n], beta_r_raw[n]);
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw DegenerateInputError("amplitude pair " + std::to_string(n) +
                                 " is zero or non-finite");
    }
    bt[n] = beta_t_raw[n] / r;
    br[n] = beta_r_raw[n] / r;
  }
  return {bt, br};
}

RVector regulate_phase_delta(const RVector& delta_raw,
                             const RegulatorConfig& reg) {
  RVector out(delta_raw.size());
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const double x = delta_raw[i];
    // Two branches keep exp() from overflowing for large |x|.
    const double s =
        x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
    // sigma saturates to exactly 0 or 1 in binary64; keep the open interval.
    out[i] = std::clamp(reg.lambda * s, std::numeric_limits<double>::denorm_min(),
                        std::nextafter(reg.lambda, 0.0));
  }
  return out;
}

double wrap_phase(double angle) {
  double r = std::fmod(angle, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

RVector apply_phase_delta(const RVector& theta, const RVector& delta_reg) {
  if (theta.size() != delta_reg.size()) {
    throw ConfigError("phase and delta vectors differ in length");
  }
  RVector out(theta.size());
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    out[i] = wrap_phase(theta[i] + delta_reg[i]);
  }
  return out;
}

CoupledAuxiliary project_coupled_phases(const RVector& theta_t,
                                        const RVector& theta_r) {
  if (theta_t.size() != theta_r.size()) {
    throw ConfigError("phase vectors differ in length");
  }
  constexpr double pi = std::numbers::pi;
  constexpr std::array<double, 4> offsets = {pi / 2, -pi / 2, 3 * pi / 2,
                                             -3 * pi / 2};
  CoupledAuxiliary aux{RVector(theta_t.size()), RVector(theta_r.size())};
  for (Eigen::Index n = 0; n < theta_t.size(); ++n) {
    const double sum = theta_t[n] + theta_r[n];
    const double diff = theta_t[n] - theta_r[n];
    double best = std::numeric_limits<double>::infinity();
    for (double t : offsets) {
      // With the optimal midpoint for offset t, the squared deviation is
      // (t - diff)^2 / 2; compare the unscaled form so ties stay exact.
      const double score = (t - diff) * (t - diff);
      if (score < best) {
        best = score;
        aux.theta_t_aux[n] = 0.5 * (sum + t);
        aux.theta_r_aux[n] = 0.5 * (sum - t);
      }
    }
  }
  return aux;
}

RVector coupling_residual(const RVector& theta_t, const RVector& theta_r) {
  return (theta_t - theta_r).array().cos().abs().matrix();
}

double coupling_penalty(const RVector& theta_t, const RVector& theta_r) {
  const CoupledAuxiliary aux = project_coupled_phases(theta_t, theta_r);
  return (theta_t - aux.theta_t_aux).squaredNorm() +
         (theta_r - aux.theta_r_aux).squaredNorm();
}

}  // namespace stargml
