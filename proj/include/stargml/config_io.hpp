// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The stargml Authors

#pragma once

#include <string>

#include "json.hpp"
#include "stargml/channels.hpp"
#include "stargml/gml.hpp"

namespace stargml {

/// Everything one solve needs: the system, how channels are drawn, and how
/// the networks are trained.
struct RunConfig {
  SystemConfig system;
  ChannelConfig channel;
  TrainConfig train;

  void validate() const;
};

/// M = 8, N = 16, K = 2, 300 epochs.
RunConfig desk_run_config();
/// M = 64, N = 100, K = 4, 500 epochs.
RunConfig paper_run_config();

// Config file schema (JSON). Every key is optional and overrides `base`;
// unknown keys are rejected. Units are part of the key name.
//
//   {
//     "system": {
//       "M": 8, "N": 16, "K": 2,
//       "p_max_w": 3.16,            // watts
//       "noise_power_w": 1e-11,     // watts
//       "weights": [1, 1],
//       "user_sides": ["transmission", "reflection"]
//     },
//     "channel": {
//       "rician_k_g": 10, "rician_k_h": 10,            // linear
//       "bs_position_m": [0, 0], "ris_position_m": [100, 0],
//       "transmission_center_m": [100, -15],
//       "reflection_center_m": [100, 15],
//       "user_radius_m": 5,
//       "pathloss_a_db": 35.6, "pathloss_b_db": 22,
//       "los": "ula_steering" | "all_ones",
//       "seed": 0
//     },
//     "train": {
//       "n_epochs": 300, "n_outer": 1, "n_inner": 1,
//       "lr_w": 1e-3, "lr_a": 5e-3, "lr_theta": 5e-3,
//       "n1": 5, "n2": 5,
//       "mode": "independent" | "coupled",
//       "rho_min": 1e-2, "rho_max": 1e2,
//       "regulator_lambda_rad": 6.283185307179586,
//       "pn_input": "split" | "stacked",
//       "seed": 0
//     }
//   }
//
// Changing K without "weights"/"user_sides" regenerates both with the
// defaults of SystemConfig::make.

/// Throws ConfigError on unknown keys, wrong types or invalid values.
RunConfig parse_run_config(const nlohmann::json& doc, RunConfig base);
RunConfig load_run_config(const std::string& path, RunConfig base);

nlohmann::json to_json(const RunConfig& cfg);

/// wsr_opt, W_opt as [[re, im], ...] rows, beta_opt, theta_opt and the
/// coupling residual of the best state before any projection.
nlohmann::json solution_to_json(const Solution& sol);

PhaseModel parse_phase_model(const std::string& name);
std::string to_string(PhaseModel mode);

}  // namespace stargml
