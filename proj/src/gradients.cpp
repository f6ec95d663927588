// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The stargml Authors

#include "stargml/gradients.hpp"

#include <cmath>
#include <numbers>

#include "stargml/errors.hpp"

namespace stargml {

GradientBundle wsr_gradients(const SystemConfig& cfg, const ChannelSet& ch,
                             const BeamformingState& state) {
  const auto K = static_cast<Eigen::Index>(cfg.K);
  const auto N = static_cast<Eigen::Index>(cfg.N);
  const CMatrix E = effective_channels(cfg, ch, state);  // K x M
  const CMatrix signals = E * state.W;                   // a_kj, K x K

  // dR/d conj(a_kj) = u_kj a_kj with
  //   u_kj = w_k / ln2 * (1/T_k - [j != k] / I_k),
  //   T_k = sum_j |a_kj|^2 + s2,  I_k = T_k - |a_kk|^2.
  CMatrix B(K, K);
  for (Eigen::Index k = 0; k < K; ++k) {
    double total = cfg.noise_power;
    for (Eigen::Index j = 0; j < K; ++j) total += std::norm(signals(k, j));
    const double interference = total - std::norm(signals(k, k));
    const double scale = cfg.weights[static_cast<std::size_t>(k)] / std::numbers::ln2;
    for (Eigen::Index j = 0; j < K; ++j) {
      const double u =
          scale * (1.0 / total - (j != k ? 1.0 / interference : 0.0));
      B(k, j) = u * signals(k, j);
    }
  }

  GradientBundle out;
  out.grad_w = E.adjoint() * B;

  // a_kj = sum_n conj(h_kn) c_n v_jn with v_j = G w_j, so
  // dR/d conj(c_n) = sum_{k on side} h_kn sum_j B_kj conj(v_jn).
  const CMatrix V = ch.G * state.W;                        // N x K
  const CMatrix C = V.conjugate() * B.transpose();         // N x K
  CVector z_t = CVector::Zero(N);
  CVector z_r = CVector::Zero(N);
  for (Eigen::Index k = 0; k < K; ++k) {
    CVector& z = cfg.user_sides[static_cast<std::size_t>(k)] == Side::transmission ? z_t : z_r;
    z += ch.h[static_cast<std::size_t>(k)].cwiseProduct(C.col(k));
  }

  out.grad_beta.resize(2 * N);
  out.grad_theta.resize(2 * N);
  auto fill = [&](const CVector& z, const RVector& beta, const RVector& theta,
                  Eigen::Index offset) {
    for (Eigen::Index n = 0; n < N; ++n) {
      const cdouble unit = std::polar(1.0, theta[n]);
      const cdouble zc = std::conj(z[n]);
      // dc = e^{j theta} dbeta + j c dtheta; dR = 2 Re(conj(z) dc).
      out.grad_beta[offset + n] = 2.0 * std::real(zc * unit);
      out.grad_theta[offset + n] = -2.0 * beta[n] * std::imag(zc * unit);
    }
  };
  fill(z_t, state.beta_t, state.theta_t, 0);
  fill(z_r, state.beta_r, state.theta_r, N);
  return out;
}

CMatrix grad_wsr_precoder(const SystemConfig& cfg, const ChannelSet& ch,
                          const BeamformingState& state) {
  return wsr_gradients(cfg, ch, state).grad_w;
}

RVector grad_wsr_amplitudes(const SystemConfig& cfg, const ChannelSet& ch,
                            const BeamformingState& state) {
  return wsr_gradients(cfg, ch, state).grad_beta;
}

RVector grad_wsr_phases(const SystemConfig& cfg, const ChannelSet& ch,
                        const BeamformingState& state) {
  return wsr_gradients(cfg, ch, state).grad_theta;
}

RMatrix real_coordinates(const CMatrix& grad_w) {
  RMatrix out(grad_w.rows(), 2 * grad_w.cols());
  out.leftCols(grad_w.cols()) = 2.0 * grad_w.real();
  out.rightCols(grad_w.cols()) = 2.0 * grad_w.imag();
  return out;
}

long double reference_wsr(const SystemConfig& cfg, const ChannelSet& ch,
                          const BeamformingState& state) {
  check_dimensions(cfg, ch, state);
  using lcomplex = std::complex<long double>;
  const std::size_t N = cfg.N;
  const std::size_t M = cfg.M;
  const std::size_t K = cfg.K;

  // Stacked coefficients beta_i e^{j theta_i}, i < 2N.
  std::vector<lcomplex> coeff(2 * N);
  const RVector beta = state.beta();
  const RVector theta = state.theta();
  for (std::size_t i = 0; i < 2 * N; ++i) {
    const long double ang = theta[static_cast<Eigen::Index>(i)];
    coeff[i] = lcomplex(std::cos(ang), std::sin(ang)) *
               static_cast<long double>(beta[static_cast<Eigen::Index>(i)]);
  }

  long double total = 0.0L;
  for (std::size_t k = 0; k < K; ++k) {
    const RVector mask = ChannelSet::selection_mask(cfg.user_sides[k], N);
    std::vector<long double> power(K, 0.0L);
    for (std::size_t j = 0; j < K; ++j) {
      lcomplex acc = 0.0L;
      for (std::size_t i = 0; i < 2 * N; ++i) {
        if (mask[static_cast<Eigen::Index>(i)] == 0.0) continue;
        const std::size_t n = i % N;
        const cdouble hkn = ch.h[k][static_cast<Eigen::Index>(n)];
        lcomplex row_dot_w = 0.0L;
        for (std::size_t m = 0; m < M; ++m) {
          const cdouble g = ch.G(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
          const cdouble w = state.W(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(j));
          row_dot_w += lcomplex(g.real(), g.imag()) * lcomplex(w.real(), w.imag());
        }
        acc += std::conj(lcomplex(hkn.real(), hkn.imag())) * coeff[i] * row_dot_w;
      }
      power[j] = std::norm(acc);
    }
    long double interference = cfg.noise_power;
    for (std::size_t j = 0; j < K; ++j) {
      if (j != k) interference += power[j];
    }
    total += static_cast<long double>(cfg.weights[k]) *
             std::log2(1.0L + power[k] / interference);
  }
  return total;
}

GradientBundle finite_diff_gradient(const StateObjective& objective,
                                    const BeamformingState& state,
                                    double step) {
  if (!(step > 0.0)) throw DomainError("finite-difference step must be positive");

  // Central difference on one real coordinate. The realized step is taken
  // from the perturbed values themselves so rounding of x +/- h cancels.
  auto central = [&](BeamformingState& probe, double& coord) {
    const double x0 = coord;
    coord = x0 + step;
    const double hi = coord;
    const long double f_hi = objective(probe);
    coord = x0 - step;
    const double lo = coord;
    const long double f_lo = objective(probe);
    coord = x0;
    return static_cast<double>((f_hi - f_lo) / static_cast<long double>(hi - lo));
  };

  BeamformingState probe = state;
  GradientBundle out;
  out.grad_w.resize(state.W.rows(), state.W.cols());
  for (Eigen::Index j = 0; j < state.W.cols(); ++j) {
    for (Eigen::Index m = 0; m < state.W.rows(); ++m) {
      cdouble& w = probe.W(m, j);
      double re = w.real();
      double im = w.imag();
      // std::complex exposes no reference to its parts; perturb via copies.
      auto perturb = [&](bool imag_part) {
        const double x0 = imag_part ? im : re;
        auto eval = [&](double x) {
          w = imag_part ? cdouble(re, x) : cdouble(x, im);
          return objective(probe);
        };
        const double hi = x0 + step;
        const double lo = x0 - step;
        const long double d = (eval(hi) - eval(lo)) / static_cast<long double>(hi - lo);
        w = cdouble(re, im);
        return static_cast<double>(d);
      };
      const double d_re = perturb(false);
      const double d_im = perturb(true);
      out.grad_w(m, j) = 0.5 * cdouble(d_re, d_im);
    }
  }

  const Eigen::Index N = state.beta_t.size();
  out.grad_beta.resize(2 * N);
  out.grad_theta.resize(2 * N);
  for (Eigen::Index n = 0; n < N; ++n) {
    out.grad_beta[n] = central(probe, probe.beta_t[n]);
    out.grad_beta[N + n] = central(probe, probe.beta_r[n]);
    out.grad_theta[n] = central(probe, probe.theta_t[n]);
    out.grad_theta[N + n] = central(probe, probe.theta_r[n]);
  }
  return out;
}

}  // namespace stargml
