// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The stargml Authors

#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <utility>
#include <vector>

#include "stargml/core_model.hpp"

namespace stargml {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

double distance(const Point2& a, const Point2& b);

/// Line-of-sight structure of the Rician channels.
enum class LosModel {
  ula_steering,  ///< half-wavelength ULA steering vectors, random angles
  all_ones,      ///< every LoS entry equal to 1
};

/// Geometry (meters), Rician factors (linear) and path-loss law
/// PL_dB = pathloss_a + pathloss_b * log10(d).
struct ChannelConfig {
  double rician_k_g = 10.0;
  double rician_k_h = 10.0;
  Point2 bs_pos{0.0, 0.0};
  Point2 ris_pos{100.0, 0.0};
  Point2 transmission_center{100.0, -15.0};
  Point2 reflection_center{100.0, 15.0};
  double user_area_radius = 5.0;
  double pathloss_a = 35.6;
  double pathloss_b = 22.0;
  LosModel los = LosModel::ula_steering;
  std::uint64_t seed = 0;

  void validate() const;
};

double dbm_to_watts(double dbm);

double path_loss_db(double d, const ChannelConfig& cfg);

/// Amplitude factor 10^(-PL_dB / 20). Throws DomainError for d <= 0.
double path_loss_linear(double d, const ChannelConfig& cfg);

/// exp(j pi n sin(angle)), n = 0..length-1.
CVector ula_steering(std::size_t length, double angle);

struct ChannelDraw {
  ChannelSet channels;
  std::vector<Point2> user_positions;
};

/// Users uniform in their side's disc, then Rician G and h_k with path loss
/// from the BS-surface and surface-user distances.
ChannelDraw draw_channels(const SystemConfig& sys, const ChannelConfig& cfg,
                          std::mt19937_64& rng);

ChannelSet generate_channels(const SystemConfig& sys, const ChannelConfig& cfg,
                             std::mt19937_64& rng);

/// Full-size reference setup: M = 64, N = 100, K = 4, P_max = 10 dBm,
/// noise -80 dBm.
std::pair<SystemConfig, ChannelConfig> default_scenario();

/// Transmit power of the reduced setup. The 8x fewer antennas and ~6x fewer
/// elements lose roughly 25 dB of array gain against the full-size setup, so
/// the power is raised by the same amount to keep the SNR regime comparable.
inline constexpr double kDeskPmaxDbm = 35.0;

/// Same geometry and noise at M = 8, N = 16, K = 2, P_max = kDeskPmaxDbm.
std::pair<SystemConfig, ChannelConfig> desk_scenario();

// Text exchange format:
//
//   stargml-channels 1
//   <M> <N> <K>
//   G
//   N lines, each: re(G[n,0]) im(G[n,0]) ... re(G[n,M-1]) im(G[n,M-1])
//   h
//   K lines, each: re(h_k[0]) im(h_k[0]) ... re(h_k[N-1]) im(h_k[N-1])
//
// Values use 17 significant digits, so a write/read cycle is exact.
void write_channels(std::ostream& os, const ChannelSet& ch);
ChannelSet read_channels(std::istream& is);

}  // namespace stargml
