// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The stargml Authors

#include "stargml/channels.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

#include "stargml/errors.hpp"

namespace stargml {

double distance(const Point2& a, const Point2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

void ChannelConfig::validate() const {
  if (!(rician_k_g >= 0.0) || !(rician_k_h >= 0.0)) {
    throw ConfigError("Rician factors must be non-negative");
  }
  if (!(user_area_radius >= 0.0)) {
    throw ConfigError("user area radius must be non-negative");
  }
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double path_loss_db(double d, const ChannelConfig& cfg) {
  if (!(d > 0.0)) throw DomainError("path loss needs a positive distance");
  return cfg.pathloss_a + cfg.pathloss_b * std::log10(d);
}

double path_loss_linear(double d, const ChannelConfig& cfg) {
  return std::pow(10.0, -path_loss_db(d, cfg) / 20.0);
}

CVector ula_steering(std::size_t length, double angle) {
  CVector a(static_cast<Eigen::Index>(length));
  const double step = std::numbers::pi * std::sin(angle);
  for (Eigen::Index n = 0; n < a.size(); ++n) {
    a[n] = std::polar(1.0, step * static_cast<double>(n));
  }
  return a;
}

namespace {

CMatrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols,
                        std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  CMatrix out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      out(i, j) = cdouble(re, im);
    }
  }
  return out;
}

Point2 uniform_in_disc(const Point2& center, double radius,
                       std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double r = radius * std::sqrt(unit(rng));
  const double phi = 2.0 * std::numbers::pi * unit(rng);
  return {center.x + r * std::cos(phi), center.y + r * std::sin(phi)};
}

CMatrix rician(double k_factor, double path_gain, const CMatrix& los,
               const CMatrix& nlos) {
  const double w_los = std::sqrt(k_factor / (1.0 + k_factor));
  const double w_nlos = std::sqrt(1.0 / (1.0 + k_factor));
  return path_gain * (w_los * los + w_nlos * nlos);
}

}  // namespace

ChannelDraw draw_channels(const SystemConfig& sys, const ChannelConfig& cfg,
                          std::mt19937_64& rng) {
  sys.validate();
  cfg.validate();
  const auto M = static_cast<Eigen::Index>(sys.M);
  const auto N = static_cast<Eigen::Index>(sys.N);
  std::uniform_real_distribution<double> angle(-std::numbers::pi / 2,
                                               std::numbers::pi / 2);

  ChannelDraw draw;
  for (std::size_t k = 0; k < sys.K; ++k) {
    const Point2& center = sys.user_sides[k] == Side::transmission
                               ? cfg.transmission_center
                               : cfg.reflection_center;
    draw.user_positions.push_back(uniform_in_disc(center, cfg.user_area_radius, rng));
  }

  CMatrix g_los;
  if (cfg.los == LosModel::all_ones) {
    g_los = CMatrix::Ones(N, M);
  } else {
    const double arrival = angle(rng);
    const double departure = angle(rng);
    g_los = ula_steering(sys.N, arrival) * ula_steering(sys.M, departure).adjoint();
  }
  const CMatrix g_nlos = gaussian_matrix(N, M, rng);
  draw.channels.G = rician(cfg.rician_k_g,
                           path_loss_linear(distance(cfg.bs_pos, cfg.ris_pos), cfg),
                           g_los, g_nlos);

  for (std::size_t k = 0; k < sys.K; ++k) {
    CMatrix h_los = cfg.los == LosModel::all_ones
                        ? CMatrix(CMatrix::Ones(N, 1))
                        : CMatrix(ula_steering(sys.N, angle(rng)));
    const CMatrix h_nlos = gaussian_matrix(N, 1, rng);
    const double gain = path_loss_linear(distance(cfg.ris_pos, draw.user_positions[k]), cfg);
    draw.channels.h.push_back(rician(cfg.rician_k_h, gain, h_los, h_nlos).col(0));
  }
  return draw;
}

ChannelSet generate_channels(const SystemConfig& sys, const ChannelConfig& cfg,
                             std::mt19937_64& rng) {
  return draw_channels(sys, cfg, rng).channels;
}

std::pair<SystemConfig, ChannelConfig> default_scenario() {
  return {SystemConfig::make(64, 100, 4, dbm_to_watts(10.0), dbm_to_watts(-80.0)),
          ChannelConfig{}};
}

std::pair<SystemConfig, ChannelConfig> desk_scenario() {
  return {SystemConfig::make(8, 16, 2, dbm_to_watts(kDeskPmaxDbm), dbm_to_watts(-80.0)),
          ChannelConfig{}};
}

void write_channels(std::ostream& os, const ChannelSet& ch) {
  const auto old_precision = os.precision(std::numeric_limits<double>::max_digits10);
  os << "stargml-channels 1\n"
     << ch.G.cols() << ' ' << ch.G.rows() << ' ' << ch.h.size() << "\nG\n";
  for (Eigen::Index n = 0; n < ch.G.rows(); ++n) {
    for (Eigen::Index m = 0; m < ch.G.cols(); ++m) {
      os << (m ? " " : "") << ch.G(n, m).real() << ' ' << ch.G(n, m).imag();
    }
    os << '\n';
  }
  os << "h\n";
  for (const auto& hk : ch.h) {
    for (Eigen::Index n = 0; n < hk.size(); ++n) {
      os << (n ? " " : "") << hk[n].real() << ' ' << hk[n].imag();
    }
    os << '\n';
  }
  os.precision(old_precision);
}

ChannelSet read_channels(std::istream& is) {
  std::string magic;
  int version = 0;
  if (!(is >> magic >> version) || magic != "stargml-channels" || version != 1) {
    throw ConfigError("not a stargml channel file (version 1)");
  }
  long M = 0, N = 0, K = 0;
  if (!(is >> M >> N >> K) || M <= 0 || N <= 0 || K <= 0) {
    throw ConfigError("channel file: bad dimension header");
  }
  auto read_value = [&is]() {
    double re = 0.0, im = 0.0;
    if (!(is >> re >> im)) throw ConfigError("channel file: truncated values");
    return cdouble(re, im);
  };
  auto expect = [&is](const char* tag) {
    std::string t;
    if (!(is >> t) || t != tag) {
      throw ConfigError(std::string("channel file: expected section '") + tag + "'");
    }
  };
  ChannelSet ch;
  expect("G");
  ch.G.resize(N, M);
  for (long n = 0; n < N; ++n) {
    for (long m = 0; m < M; ++m) ch.G(n, m) = read_value();
  }
  expect("h");
  for (long k = 0; k < K; ++k) {
    CVector hk(N);
    for (long n = 0; n < N; ++n) hk[n] = read_value();
    ch.h.push_back(std::move(hk));
  }
  return ch;
}

}  // namespace stargml
