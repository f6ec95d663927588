// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The stargml Authors

#include "stargml/core_model.hpp"

#include <cmath>
#include <string>

#include "stargml/errors.hpp"

namespace stargml {

SystemConfig SystemConfig::make(std::size_t M, std::size_t N, std::size_t K,
                                double p_max, double noise_power) {
  SystemConfig cfg;
  cfg.M = M;
  cfg.N = N;
  cfg.K = K;
  cfg.p_max = p_max;
  cfg.noise_power = noise_power;
  cfg.weights.assign(K, 1.0);
  const std::size_t n_trans = (K + 1) / 2;
  cfg.user_sides.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    cfg.user_sides[k] = k < n_trans ? Side::transmission : Side::reflection;
  }
  return cfg;
}

void SystemConfig::validate() const {
  if (M == 0 || N == 0 || K == 0) {
    throw ConfigError("M, N and K must be positive");
  }
  if (!(p_max > 0.0) || !std::isfinite(p_max)) {
    throw ConfigError("p_max must be positive and finite");
  }
  if (!(noise_power > 0.0) || !std::isfinite(noise_power)) {
    throw ConfigError("noise_power must be positive and finite");
  }
  if (user_sides.size() != K) {
    throw ConfigError("user_sides must have K entries, got " +
                      std::to_string(user_sides.size()));
  }
  if (weights.size() != K) {
    throw ConfigError("weights must have K entries, got " +
                      std::to_string(weights.size()));
  }
  bool any_positive = false;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw ConfigError("user weights must be finite and non-negative");
    }
    any_positive = any_positive || w > 0.0;
  }
  if (!any_positive) {
    throw ConfigError("at least one user weight must be positive");
  }
}

std::size_t SystemConfig::count_on(Side side) const {
  std::size_t n = 0;
  for (Side s : user_sides) n += s == side ? 1 : 0;
  return n;
}

CMatrix ChannelSet::augmented_G() const {
  CMatrix out(2 * G.rows(), G.cols());
  out.topRows(G.rows()) = G;
  out.bottomRows(G.rows()) = G;
  return out;
}

CVector ChannelSet::augmented_h(std::size_t k) const {
  const CVector& hk = h.at(k);
  CVector out(2 * hk.size());
  out.head(hk.size()) = hk;
  out.tail(hk.size()) = hk;
  return out;
}

RVector ChannelSet::selection_mask(Side side, std::size_t N) {
  RVector mask = RVector::Zero(static_cast<Eigen::Index>(2 * N));
  const auto n = static_cast<Eigen::Index>(N);
  if (side == Side::transmission) {
    mask.head(n).setOnes();
  } else {
    mask.tail(n).setOnes();
  }
  return mask;
}

RVector BeamformingState::beta() const {
  RVector out(beta_t.size() + beta_r.size());
  out << beta_t, beta_r;
  return out;
}

RVector BeamformingState::theta() const {
  RVector out(theta_t.size() + theta_r.size());
  out << theta_t, theta_r;
  return out;
}

void BeamformingState::set_beta(const RVector& stacked) {
  const Eigen::Index n = stacked.size() / 2;
  beta_t = stacked.head(n);
  beta_r = stacked.tail(n);
}

void BeamformingState::set_theta(const RVector& stacked) {
  const Eigen::Index n = stacked.size() / 2;
  theta_t = stacked.head(n);
  theta_r = stacked.tail(n);
}

bool BeamformingState::all_finite() const {
  return W.allFinite() && beta_t.allFinite() && beta_r.allFinite() &&
         theta_t.allFinite() && theta_r.allFinite();
}

void check_dimensions(const SystemConfig& cfg, const ChannelSet& ch,
                      const BeamformingState& state) {
  const auto M = static_cast<Eigen::Index>(cfg.M);
  const auto N = static_cast<Eigen::Index>(cfg.N);
  const auto K = static_cast<Eigen::Index>(cfg.K);
  if (cfg.user_sides.size() != cfg.K || cfg.weights.size() != cfg.K) {
    throw ConfigError("user_sides/weights do not match K");
  }
  if (ch.G.rows() != N || ch.G.cols() != M) {
    throw ConfigError("channel G must be N x M");
  }
  if (ch.h.size() != cfg.K) {
    throw ConfigError("channel set must hold K user channels");
  }
  for (const auto& hk : ch.h) {
    if (hk.size() != N) throw ConfigError("user channel must have length N");
  }
  if (state.W.rows() != M || state.W.cols() != K) {
    throw ConfigError("precoder must be M x K");
  }
  if (state.beta_t.size() != N || state.beta_r.size() != N ||
      state.theta_t.size() != N || state.theta_r.size() != N) {
    throw ConfigError("amplitude and phase vectors must have length N");
  }
}

std::pair<CVector, CVector> star_coefficient_vectors(
    const BeamformingState& state) {
  auto polar_vec = [](const RVector& mag, const RVector& arg) {
    CVector c(mag.size());
    for (Eigen::Index n = 0; n < mag.size(); ++n) {
      c[n] = std::polar(1.0, arg[n]) * mag[n];
    }
    return c;
  };
  return {polar_vec(state.beta_t, state.theta_t),
          polar_vec(state.beta_r, state.theta_r)};
}

CMatrix effective_channels(const SystemConfig& cfg, const ChannelSet& ch,
                           const BeamformingState& state) {
  check_dimensions(cfg, ch, state);
  const auto [c_t, c_r] = star_coefficient_vectors(state);
  CMatrix E(cfg.K, cfg.M);
  for (std::size_t k = 0; k < cfg.K; ++k) {
    const CVector& c = cfg.user_sides[k] == Side::transmission ? c_t : c_r;
    // (conj(h) .* c)^T G
    const CVector weighted = ch.h[k].conjugate().cwiseProduct(c);
    E.row(static_cast<Eigen::Index>(k)) = weighted.transpose() * ch.G;
  }
  return E;
}

namespace {

double sinr_from_row(const Eigen::Ref<const CMatrix>& signals, std::size_t k,
                     double noise_power) {
  const auto kk = static_cast<Eigen::Index>(k);
  double interference = 0.0;
  for (Eigen::Index j = 0; j < signals.cols(); ++j) {
    if (j != kk) interference += std::norm(signals(kk, j));
  }
  return std::norm(signals(kk, kk)) / (interference + noise_power);
}

}  // namespace

double sinr(const SystemConfig& cfg, const ChannelSet& ch,
            const BeamformingState& state, std::size_t k) {
  if (k >= cfg.K) throw ConfigError("user index out of range");
  const CMatrix E = effective_channels(cfg, ch, state);
  const auto kk = static_cast<Eigen::Index>(k);
  const CMatrix row = E.row(kk) * state.W;
  double interference = 0.0;
  for (Eigen::Index j = 0; j < row.cols(); ++j) {
    if (j != kk) interference += std::norm(row(0, j));
  }
  return std::norm(row(0, kk)) / (interference + cfg.noise_power);
}

double sinr_augmented(const SystemConfig& cfg, const ChannelSet& ch,
                      const BeamformingState& state, std::size_t k) {
  check_dimensions(cfg, ch, state);
  if (k >= cfg.K) throw ConfigError("user index out of range");
  const CVector h_aug = ch.augmented_h(k);
  const CMatrix G_aug = ch.augmented_G();
  const RVector mask = ChannelSet::selection_mask(cfg.user_sides[k], cfg.N);
  const RVector amp = state.beta();
  const RVector phase = state.theta();

  // Row vector h~^H S A Phi, all factors diagonal.
  CVector row(2 * cfg.N);
  for (Eigen::Index i = 0; i < row.size(); ++i) {
    row[i] = std::conj(h_aug[i]) * mask[i] * amp[i] *
             std::exp(cdouble(0.0, phase[i]));
  }
  const Eigen::RowVectorXcd through = row.transpose() * G_aug;
  const auto kk = static_cast<Eigen::Index>(k);
  double signal = 0.0;
  double interference = 0.0;
  for (Eigen::Index j = 0; j < state.W.cols(); ++j) {
    const double p = std::norm((through * state.W.col(j)).value());
    if (j == kk) {
      signal = p;
    } else {
      interference += p;
    }
  }
  return signal / (interference + cfg.noise_power);
}

RVector sinrs(const SystemConfig& cfg, const ChannelSet& ch,
              const BeamformingState& state) {
  const CMatrix signals = effective_channels(cfg, ch, state) * state.W;
  RVector out(cfg.K);
  for (std::size_t k = 0; k < cfg.K; ++k) {
    out[static_cast<Eigen::Index>(k)] =
        sinr_from_row(signals, k, cfg.noise_power);
  }
  return out;
}

double wsr(const SystemConfig& cfg, const RVector& gammas) {
  if (gammas.size() != static_cast<Eigen::Index>(cfg.weights.size())) {
    throw ConfigError("one SINR per user expected");
  }
  double total = 0.0;
  for (Eigen::Index k = 0; k < gammas.size(); ++k) {
    if (!(gammas[k] >= 0.0)) {
      throw DomainError("SINR must be non-negative");
    }
    total += cfg.weights[static_cast<std::size_t>(k)] * std::log2(1.0 + gammas[k]);
  }
  return total;
}

double evaluate_wsr(const SystemConfig& cfg, const ChannelSet& ch,
                    const BeamformingState& state) {
  return wsr(cfg, sinrs(cfg, ch, state));
}

}  // namespace stargml
