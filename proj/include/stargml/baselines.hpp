// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The stargml Authors

#pragma once

#include <cstddef>
#include <cstdint>

#include "stargml/core_model.hpp"
#include "stargml/gml.hpp"

namespace stargml {

/// Random phases and beta_t = beta_r = 1/sqrt(2), both frozen; only the
/// precoder network trains.
Solution random_phase_baseline(const SystemConfig& sys, const ChannelSet& ch,
                               const TrainConfig& train);

/// Elements [0, N/2) reflect only, [N/2, N) transmit only. Amplitudes are
/// frozen; precoder and phases train. Throws ConfigError for odd N.
Solution conventional_ris_baseline(const SystemConfig& sys,
                                   const ChannelSet& ch,
                                   const TrainConfig& train);

/// Relative trial step of each block. The precoder step is a fraction of
/// ||W||_F, the amplitude and phase steps are the largest coordinate move
/// (in amplitude units and radians).
struct PgaStepSizes {
  double w = 0.5;
  double beta = 0.2;
  double theta = 0.5;
};

/// Projected gradient ascent on (W, beta, theta), independent phases.
/// Each trial step is followed by the power and amplitude projections and a
/// phase wrap; a trial that does not increase R halves the step (up to 40
/// times), an accepted one doubles it. Returns the last (best) iterate and
/// one trace row per step.
Solution pga_oracle(const SystemConfig& sys, const ChannelSet& ch,
                    std::size_t steps, const PgaStepSizes& step_sizes = {},
                    std::uint64_t seed = 0);

}  // namespace stargml
