// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The stargml Authors

#include "stargml/gml.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <tuple>

#include "stargml/errors.hpp"
#include "stargml/gradients.hpp"

namespace stargml {

double rho_at(const PenaltySchedule& schedule, std::size_t epoch,
              std::size_t n_epochs) {
  if (n_epochs == 0) return schedule.rho_max;
  const double frac = static_cast<double>(epoch) / static_cast<double>(n_epochs);
  return schedule.rho_min * std::pow(schedule.rho_max / schedule.rho_min, frac);
}

void TrainConfig::validate() const {
  if (n_epochs == 0 || n_outer == 0 || n_inner == 0 || n1 == 0 || n2 == 0) {
    throw ConfigError("iteration counts and update intervals must be >= 1");
  }
  if (!(lr_w > 0.0) || !(lr_a > 0.0) || !(lr_theta > 0.0)) {
    throw ConfigError("learning rates must be positive");
  }
  if (!(penalty.rho_min > 0.0) || !(penalty.rho_max >= penalty.rho_min)) {
    throw ConfigError("penalty schedule needs 0 < rho_min <= rho_max");
  }
  if (!(regulator.lambda > 0.0)) {
    throw ConfigError("regulator gain must be positive");
  }
}

BeamformingState Solution::state() const {
  BeamformingState s;
  s.W = W_opt;
  s.set_beta(beta_opt);
  s.set_theta(theta_opt);
  return s;
}

BeamformingState random_initial_state(const SystemConfig& cfg,
                                      std::mt19937_64& rng) {
  const auto M = static_cast<Eigen::Index>(cfg.M);
  const auto N = static_cast<Eigen::Index>(cfg.N);
  const auto K = static_cast<Eigen::Index>(cfg.K);
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);

  BeamformingState s;
  s.W.resize(M, K);
  for (Eigen::Index j = 0; j < K; ++j) {
    for (Eigen::Index m = 0; m < M; ++m) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      s.W(m, j) = cdouble(re, im);
    }
  }
  s.W = normalize_power(s.W, cfg.p_max);
  s.beta_t = RVector::Constant(N, std::sqrt(0.5));
  s.beta_r = RVector::Constant(N, std::sqrt(0.5));
  s.theta_t.resize(N);
  s.theta_r.resize(N);
  for (Eigen::Index n = 0; n < N; ++n) s.theta_t[n] = angle(rng);
  for (Eigen::Index n = 0; n < N; ++n) s.theta_r[n] = angle(rng);
  return s;
}

GmlSetup make_setup(const SystemConfig& cfg, const TrainConfig& train) {
  std::mt19937_64 rng(train.seed);
  GmlSetup setup;
  setup.nets = SubNetworks::random(cfg.M, cfg.N, rng, train.pn_input);
  setup.initial = random_initial_state(cfg, rng);
  return setup;
}

namespace {

struct PrecoderTape {
  std::vector<Mlp::Tape> net;
  std::vector<CMatrix> pre_normalization;
};

struct AmplitudeTape {
  std::vector<Mlp::Tape> net;
  std::vector<RVector> pre_normalization;
};

struct PhaseTape {
  std::vector<Mlp::Tape> net;
  std::vector<RVector> regulated;
};

// W <- normalize(W + PN(grad_W R)), n_inner times.
CMatrix precoder_block(const Mlp& net, BeamformingState s, const ChannelSet& ch,
                       const SystemConfig& cfg, std::size_t n_inner,
                       PrecoderTape* tape) {
  for (std::size_t i = 0; i < n_inner; ++i) {
    const CMatrix grad = grad_wsr_precoder(cfg, ch, s);
    Mlp::Tape step_tape;
    const CMatrix raw = s.W + pn_forward(net, grad, step_tape);
    s.W = normalize_power(raw, cfg.p_max);
    if (tape) {
      tape->net.push_back(std::move(step_tape));
      tape->pre_normalization.push_back(raw);
    }
  }
  return s.W;
}

// beta <- normalize(beta + AN(grad_beta R)), n_inner times.
RVector amplitude_block(const Mlp& net, BeamformingState s,
                        const ChannelSet& ch, const SystemConfig& cfg,
                        std::size_t n_inner, AmplitudeTape* tape) {
  for (std::size_t i = 0; i < n_inner; ++i) {
    const RVector grad = grad_wsr_amplitudes(cfg, ch, s);
    Mlp::Tape step_tape;
    const RVector raw = s.beta() + an_forward(net, grad, step_tape);
    const auto n = static_cast<Eigen::Index>(cfg.N);
    auto [bt, br] = normalize_amplitudes(raw.head(n), raw.tail(n));
    s.beta_t = std::move(bt);
    s.beta_r = std::move(br);
    if (tape) {
      tape->net.push_back(std::move(step_tape));
      tape->pre_normalization.push_back(raw);
    }
  }
  return s.beta();
}

// theta <- wrap(theta + lambda sigmoid(TN(grad_theta R))), n_inner times.
RVector phase_block(const Mlp& net, BeamformingState s, const ChannelSet& ch,
                    const SystemConfig& cfg, const RegulatorConfig& reg,
                    std::size_t n_inner, PhaseTape* tape) {
  for (std::size_t i = 0; i < n_inner; ++i) {
    const RVector grad = grad_wsr_phases(cfg, ch, s);
    Mlp::Tape step_tape;
    const RVector delta = regulate_phase_delta(tn_forward(net, grad, step_tape), reg);
    s.set_theta(apply_phase_delta(s.theta(), delta));
    if (tape) {
      tape->net.push_back(std::move(step_tape));
      tape->regulated.push_back(delta);
    }
  }
  return s.theta();
}

// Backward passes. `upstream` is dLoss/d(output of the block) in real
// coordinates; for the precoder the real and imaginary parts of the complex
// matrix carry dLoss/dRe(W) and dLoss/dIm(W). Gradient inputs to the
// networks are treated as constants.

RVector precoder_backward(const Mlp& net, const PrecoderTape& tape,
                          CMatrix upstream, double p_max) {
  RVector grad = RVector::Zero(net.parameters().size());
  const PnInput layout = pn_layout(net, upstream.rows());
  for (std::size_t i = tape.net.size(); i-- > 0;) {
    const CMatrix& x = tape.pre_normalization[i];
    const double sq = x.squaredNorm();
    const double scale = std::sqrt(p_max / sq);
    // y = scale(x) x  =>  dx = scale (dy - x <x, dy> / |x|^2)
    const double radial = (x.real().cwiseProduct(upstream.real()) +
                           x.imag().cwiseProduct(upstream.imag()))
                              .sum();
    upstream = scale * (upstream - x * (radial / sq));
    grad += net.backward(tape.net[i], complex_to_batch(upstream, layout));
  }
  return grad;
}

RVector amplitude_backward(const Mlp& net, const AmplitudeTape& tape,
                           RVector upstream) {
  RVector grad = RVector::Zero(net.parameters().size());
  for (std::size_t i = tape.net.size(); i-- > 0;) {
    const RVector& x = tape.pre_normalization[i];
    const Eigen::Index n_el = x.size() / 2;
    for (Eigen::Index n = 0; n < n_el; ++n) {
      const double r = std::hypot(x[n], x[n_el + n]);
      const double yt = x[n] / r;
      const double yr = x[n_el + n] / r;
      const double radial = yt * upstream[n] + yr * upstream[n_el + n];
      upstream[n] = (upstream[n] - yt * radial) / r;
      upstream[n_el + n] = (upstream[n_el + n] - yr * radial) / r;
    }
    grad += net.backward(tape.net[i], upstream);
  }
  return grad;
}

RVector phase_backward(const Mlp& net, const PhaseTape& tape,
                       const RVector& upstream, const RegulatorConfig& reg) {
  // The wrap is locally the identity, so dLoss/dtheta passes unchanged to
  // every earlier step.
  RVector grad = RVector::Zero(net.parameters().size());
  for (std::size_t i = tape.net.size(); i-- > 0;) {
    const RVector s = tape.regulated[i] / reg.lambda;
    const RVector d_out =
        upstream.cwiseProduct((reg.lambda * s.array() * (1.0 - s.array())).matrix());
    grad += net.backward(tape.net[i], d_out);
  }
  return grad;
}

double max_amplitude_error(const BeamformingState& s) {
  return ((s.beta_t.cwiseAbs2() + s.beta_r.cwiseAbs2()).array() - 1.0)
      .abs()
      .maxCoeff();
}

}  // namespace

BeamformingState inner_update_precoder(const SubNetworks& nets,
                                       const BeamformingState& state,
                                       const ChannelSet& ch,
                                       const SystemConfig& cfg,
                                       std::size_t n_inner) {
  BeamformingState out = state;
  out.W = precoder_block(nets.precoder, state, ch, cfg, n_inner, nullptr);
  return out;
}

BeamformingState inner_update_amplitudes(const SubNetworks& nets,
                                         const BeamformingState& state,
                                         const ChannelSet& ch,
                                         const SystemConfig& cfg,
                                         std::size_t n_inner) {
  BeamformingState out = state;
  out.set_beta(amplitude_block(nets.amplitude, state, ch, cfg, n_inner, nullptr));
  return out;
}

BeamformingState inner_update_phases(const SubNetworks& nets,
                                     const BeamformingState& state,
                                     const ChannelSet& ch,
                                     const SystemConfig& cfg,
                                     const RegulatorConfig& reg,
                                     std::size_t n_inner) {
  BeamformingState out = state;
  out.set_theta(phase_block(nets.phase, state, ch, cfg, reg, n_inner, nullptr));
  return out;
}

double loss_independent(const SystemConfig& cfg, const ChannelSet& ch,
                        const BeamformingState& state) {
  return -evaluate_wsr(cfg, ch, state);
}

double loss_coupled_tn(const SystemConfig& cfg, const ChannelSet& ch,
                       const BeamformingState& state, double rho) {
  if (!(rho >= 0.0)) throw DomainError("penalty weight must be non-negative");
  return -evaluate_wsr(cfg, ch, state) +
         rho * coupling_penalty(state.theta_t, state.theta_r);
}

OuterStep outer_iteration(const SubNetworks& nets,
                          const BeamformingState& initial,
                          const BeamformingState& current, const ChannelSet& ch,
                          const SystemConfig& cfg, const TrainConfig& train,
                          double rho) {
  const bool coupled = train.mode == PhaseModel::coupled;
  const auto N = static_cast<Eigen::Index>(cfg.N);
  const char* stage = "precoder block";
  PrecoderTape pn_tape;
  AmplitudeTape an_tape;
  PhaseTape tn_tape;
  // Completed inner steps of the block that was running.
  auto inner_done = [&] {
    if (stage == std::string_view("precoder block")) return pn_tape.net.size();
    if (stage == std::string_view("amplitude block")) return an_tape.net.size();
    if (stage == std::string_view("phase block")) return tn_tape.net.size();
    return train.n_inner - 1;
  };

  OuterStep out;
  try {
    out.result = current;
    BeamformingState s = out.result;
    s.W = initial.W;
    out.result.W = precoder_block(nets.precoder, s, ch, cfg, train.n_inner, &pn_tape);

    if (train.train_amplitudes) {
      stage = "amplitude block";
      s = out.result;
      s.beta_t = initial.beta_t;
      s.beta_r = initial.beta_r;
      out.result.set_beta(amplitude_block(nets.amplitude, s, ch, cfg,
                                          train.n_inner, &an_tape));
    }
    if (train.train_phases) {
      stage = "phase block";
      s = out.result;
      s.theta_t = initial.theta_t;
      s.theta_r = initial.theta_r;
      out.result.set_theta(phase_block(nets.phase, s, ch, cfg, train.regulator,
                                       train.n_inner, &tn_tape));
    }

    // Losses at (W*, A*, Phi*), other variables held constant per network.
    stage = "loss assembly";
    const BeamformingState& x = out.result;
    const GradientBundle g = wsr_gradients(cfg, ch, x);
    out.wsr = evaluate_wsr(cfg, ch, x);
    const CoupledAuxiliary aux = project_coupled_phases(x.theta_t, x.theta_r);
    out.violation = (x.theta_t - aux.theta_t_aux).squaredNorm() +
                    (x.theta_r - aux.theta_r_aux).squaredNorm();
    BeamformingState projected = x;
    projected.theta_t = aux.theta_t_aux;
    projected.theta_r = aux.theta_r_aux;
    out.wsr_projected = evaluate_wsr(cfg, ch, projected);

    stage = "backward";
    out.grad_precoder =
        precoder_backward(nets.precoder, pn_tape, -2.0 * g.grad_w, cfg.p_max);
    out.grad_amplitude = RVector::Zero(nets.amplitude.parameters().size());
    if (train.train_amplitudes) {
      out.grad_amplitude = amplitude_backward(nets.amplitude, an_tape, -g.grad_beta);
    }
    out.grad_phase = RVector::Zero(nets.phase.parameters().size());
    if (train.train_phases) {
      RVector upstream = -g.grad_theta;
      if (coupled) {
        RVector aux_stacked(2 * N);
        aux_stacked << aux.theta_t_aux, aux.theta_r_aux;
        upstream += 2.0 * rho * (x.theta() - aux_stacked);
      }
      out.grad_phase = phase_backward(nets.phase, tn_tape, upstream, train.regulator);
    }
  } catch (const std::exception& e) {
    throw GmlRunError("inner " + std::to_string(inner_done() + 1) + " (" + stage +
                      "): " + e.what());
  }
  return out;
}

Solution run_gml(const SystemConfig& cfg, const ChannelSet& ch,
                 const TrainConfig& train) {
  return run_gml(cfg, ch, train, make_setup(cfg, train));
}

Solution run_gml(const SystemConfig& cfg, const ChannelSet& ch,
                 const TrainConfig& train, GmlSetup setup) {
  cfg.validate();
  train.validate();
  check_dimensions(cfg, ch, setup.initial);
  const bool coupled = train.mode == PhaseModel::coupled;

  // Epoch-initial variables, shared by every outer iteration of the run.
  BeamformingState initial = setup.initial;
  initial.W = normalize_power(initial.W, cfg.p_max);
  if (train.train_amplitudes) {
    std::tie(initial.beta_t, initial.beta_r) =
        normalize_amplitudes(initial.beta_t, initial.beta_r);
  }
  initial.set_theta(initial.theta().unaryExpr(&wrap_phase));

  SubNetworks& nets = setup.nets;
  AdamState pn_adam = AdamState::zeros(nets.precoder.parameter_count());
  AdamState an_adam = AdamState::zeros(nets.amplitude.parameter_count());
  AdamState tn_adam = AdamState::zeros(nets.phase.parameter_count());

  BeamformingState current = initial;  // W*, A*, Phi*
  BeamformingState best = initial;
  double best_value = -std::numeric_limits<double>::infinity();

  Solution sol;
  sol.trace.reserve(train.n_epochs);
  const double inv_outer = 1.0 / static_cast<double>(train.n_outer);

  for (std::size_t epoch = 1; epoch <= train.n_epochs; ++epoch) {
    const double rho = coupled ? rho_at(train.penalty, epoch, train.n_epochs) : 0.0;
    RVector pn_grad = RVector::Zero(nets.precoder.parameters().size());
    RVector an_grad = RVector::Zero(nets.amplitude.parameters().size());
    RVector tn_grad = RVector::Zero(nets.phase.parameters().size());
    double wsr_now = 0.0;
    double wsr_projected = 0.0;
    double violation = 0.0;

    for (std::size_t outer = 1; outer <= train.n_outer; ++outer) {
      OuterStep step;
      try {
        step = outer_iteration(nets, initial, current, ch, cfg, train, rho);
      } catch (const std::exception& e) {
        throw GmlRunError("epoch " + std::to_string(epoch) + ", outer " +
                          std::to_string(outer) + ", " + e.what());
      }
      current = step.result;
      wsr_now = step.wsr;
      wsr_projected = step.wsr_projected;
      violation = step.violation;
      pn_grad += inv_outer * step.grad_precoder;
      an_grad += inv_outer * step.grad_amplitude;
      tn_grad += inv_outer * step.grad_phase;

      // Coupled mode ranks states by the WSR they achieve once made
      // feasible; independent mode by the WSR itself.
      const double value = coupled ? wsr_projected : wsr_now;
      if (value > best_value) {
        best_value = value;
        best = current;
      }
    }

    try {
      adam_step(nets.precoder.parameters(), pn_grad, pn_adam, train.lr_w);
      if (train.train_amplitudes && epoch % train.n1 == 0) {
        adam_step(nets.amplitude.parameters(), an_grad, an_adam, train.lr_a);
      }
      if (train.train_phases && epoch % train.n2 == 0) {
        adam_step(nets.phase.parameters(), tn_grad, tn_adam, train.lr_theta);
      }
    } catch (const std::exception& e) {
      throw GmlRunError("epoch " + std::to_string(epoch) +
                        " (network update): " + e.what());
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.wsr_best = best_value;
    rec.wsr_current = wsr_now;
    rec.wsr_projected = wsr_projected;
    rec.penalty = violation;
    rec.rho = rho;
    rec.power_error = std::abs(current.W.squaredNorm() - cfg.p_max) / cfg.p_max;
    rec.amplitude_error = max_amplitude_error(current);
    rec.max_coupling_residual =
        coupling_residual(current.theta_t, current.theta_r).maxCoeff();
    rec.phase_difference = (current.theta_t - current.theta_r).unaryExpr(&wrap_phase);
    sol.trace.push_back(std::move(rec));
  }

  sol.W_opt = best.W;
  sol.beta_opt = best.beta();
  sol.theta_unprojected = best.theta();
  sol.wsr_unprojected = evaluate_wsr(cfg, ch, best);
  sol.residual_unprojected = coupling_residual(best.theta_t, best.theta_r).maxCoeff();
  if (coupled) {
    const CoupledAuxiliary aux = project_coupled_phases(best.theta_t, best.theta_r);
    BeamformingState projected = best;
    projected.theta_t = aux.theta_t_aux.unaryExpr(&wrap_phase);
    projected.theta_r = aux.theta_r_aux.unaryExpr(&wrap_phase);
    sol.theta_opt = projected.theta();
    sol.wsr_opt = evaluate_wsr(cfg, ch, projected);
    sol.feasible_coupled =
        coupling_residual(projected.theta_t, projected.theta_r).maxCoeff() < 1e-9;
  } else {
    sol.theta_opt = best.theta();
    sol.wsr_opt = sol.wsr_unprojected;
    sol.feasible_coupled = sol.residual_unprojected < 1e-9;
  }
  return sol;
}

}  // namespace stargml
