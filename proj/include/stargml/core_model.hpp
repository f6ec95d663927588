// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The stargml Authors

#pragma once

#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace stargml {

using cdouble = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

/// Which half-space a user occupies relative to the surface.
enum class Side { transmission, reflection };

/// Dimensions, power budget and user bookkeeping of one STAR-RIS downlink.
///
/// Units: p_max and noise_power in watts. Weights are dimensionless.
struct SystemConfig {
  std::size_t M = 1;  ///< BS antennas
  std::size_t N = 1;  ///< surface elements
  std::size_t K = 1;  ///< single-antenna users
  std::vector<Side> user_sides;
  double p_max = 1.0;
  double noise_power = 1.0;
  std::vector<double> weights;

  /// Unit weights; first ceil(K/2) users on the transmission side.
  static SystemConfig make(std::size_t M, std::size_t N, std::size_t K,
                           double p_max, double noise_power);

  /// Throws ConfigError on any violated invariant.
  void validate() const;

  std::size_t count_on(Side side) const;
};

/// BS->surface channel G (N x M) and surface->user channels h_k (length N).
///
/// The received signal of user k is h_k^H Theta G w, so h_k is stored as the
/// column vector whose conjugate transpose is the k-th row of H.
struct ChannelSet {
  CMatrix G;
  std::vector<CVector> h;

  /// [G; G], 2N x M.
  CMatrix augmented_G() const;
  /// [h_k; h_k], length 2N.
  CVector augmented_h(std::size_t k) const;
  /// Indicator of the half of the 2N stacked coefficients serving `side`.
  static RVector selection_mask(Side side, std::size_t N);
};

/// The optimization variables: precoder W (M x K), amplitudes and phases of
/// the transmission (t) and reflection (r) coefficients, each of length N.
struct BeamformingState {
  CMatrix W;
  RVector beta_t;
  RVector beta_r;
  RVector theta_t;
  RVector theta_r;

  /// (beta_t, beta_r) stacked, length 2N.
  RVector beta() const;
  /// (theta_t, theta_r) stacked, length 2N.
  RVector theta() const;
  void set_beta(const RVector& stacked);
  void set_theta(const RVector& stacked);

  bool all_finite() const;
};

/// Auxiliary phases satisfying cos(theta_t_aux - theta_r_aux) = 0.
struct CoupledAuxiliary {
  RVector theta_t_aux;
  RVector theta_r_aux;
};

/// Throws ConfigError if cfg, ch and state disagree on M, N or K.
void check_dimensions(const SystemConfig& cfg, const ChannelSet& ch,
                      const BeamformingState& state);

/// Diagonals of Theta_t and Theta_r: c = beta * exp(j theta).
std::pair<CVector, CVector> star_coefficient_vectors(
    const BeamformingState& state);

/// Row k holds h_k^H Theta_tau G for the side tau of user k (K x M).
CMatrix effective_channels(const SystemConfig& cfg, const ChannelSet& ch,
                           const BeamformingState& state);

/// SINR of user k through the diagonal-coefficient form.
double sinr(const SystemConfig& cfg, const ChannelSet& ch,
            const BeamformingState& state, std::size_t k);

/// SINR of user k through the 2N-dimensional stacked form with selection
/// masks. Independent of sinr(); the two must agree.
double sinr_augmented(const SystemConfig& cfg, const ChannelSet& ch,
                      const BeamformingState& state, std::size_t k);

/// All K SINRs at once; shares the effective-channel product.
RVector sinrs(const SystemConfig& cfg, const ChannelSet& ch,
              const BeamformingState& state);

/// sum_k w_k log2(1 + gamma_k). Throws DomainError on negative gamma.
double wsr(const SystemConfig& cfg, const RVector& gammas);

/// wsr(cfg, sinrs(cfg, ch, state)).
double evaluate_wsr(const SystemConfig& cfg, const ChannelSet& ch,
                    const BeamformingState& state);

}  // namespace stargml
