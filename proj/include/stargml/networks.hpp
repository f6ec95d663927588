// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The stargml Authors

#pragma once

#include <cstddef>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "stargml/core_model.hpp"

namespace stargml {

/// Two affine maps with a ReLU between them:
///   y = W2 relu(W1 x + b1) + b2.
///
/// All parameters live in one flat vector laid out as
/// [W1 (hidden x in, column-major), b1, W2 (out x hidden, column-major), b2]
/// so that optimizers and checkpoints can treat the network as one array.
/// Batches are passed column-wise: X is input_dim x batch.
class Mlp {
 public:
  Mlp() = default;
  /// All-zero parameters.
  Mlp(std::size_t input_dim, std::size_t hidden_dim, std::size_t output_dim);

  /// Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], zero biases.
  static Mlp random(std::size_t input_dim, std::size_t hidden_dim,
                    std::size_t output_dim, std::mt19937_64& rng);

  /// Intermediate values kept for the backward pass.
  struct Tape {
    RMatrix input;
    RMatrix pre_activation;
  };

  RMatrix forward(const RMatrix& X) const;
  RMatrix forward(const RMatrix& X, Tape& tape) const;

  /// Gradient of a scalar loss with respect to the flat parameter vector,
  /// given dLoss/dY for the batch recorded in `tape`.
  RVector backward(const Tape& tape, const RMatrix& dY) const;

  std::size_t input_dim() const { return in_; }
  std::size_t hidden_dim() const { return hidden_; }
  std::size_t output_dim() const { return out_; }
  std::size_t parameter_count() const;

  RVector& parameters() { return params_; }
  const RVector& parameters() const { return params_; }

  Eigen::Map<const RMatrix> W1() const;
  Eigen::Map<const RVector> b1() const;
  Eigen::Map<const RMatrix> W2() const;
  Eigen::Map<const RVector> b2() const;
  Eigen::Map<RMatrix> W1();
  Eigen::Map<RVector> b1();
  Eigen::Map<RMatrix> W2();
  Eigen::Map<RVector> b2();

 private:
  std::size_t in_ = 0;
  std::size_t hidden_ = 0;
  std::size_t out_ = 0;
  RVector params_;
};

/// Hidden widths of the three sub-networks.
inline constexpr std::size_t kPrecoderHidden = 200;
inline constexpr std::size_t kAmplitudeHidden = 300;
inline constexpr std::size_t kPhaseHidden = 300;

/// How the complex precoder gradient is presented to the PN.
///   split:   2K real M-vectors (real parts of the K columns, then imaginary
///            parts); PN is M -> 200 -> M.
///   stacked: K real 2M-vectors [Re w_k; Im w_k]; PN is 2M -> 200 -> 2M.
enum class PnInput { split, stacked };

/// The precoder (PN), amplitude (AN) and phase (TN) networks.
struct SubNetworks {
  Mlp precoder;
  Mlp amplitude;
  Mlp phase;

  /// PN: M -> 200 -> M (or 2M with PnInput::stacked); AN, TN: 2N -> 300 -> 2N.
  static SubNetworks random(std::size_t M, std::size_t N, std::mt19937_64& rng,
                            PnInput pn_input = PnInput::split);
  static SubNetworks zeros(std::size_t M, std::size_t N,
                           PnInput pn_input = PnInput::split);
};

/// Complex M x K matrix <-> real batch in the given layout.
RMatrix complex_to_batch(const CMatrix& Z, PnInput layout = PnInput::split);
CMatrix batch_to_complex(const RMatrix& batch,
                         PnInput layout = PnInput::split);

/// Layout implied by a PN's input width for M antennas; ConfigError when the
/// width is neither M nor 2M.
PnInput pn_layout(const Mlp& net, Eigen::Index M);

/// Runs the real columns of grad_w through the shared-weight network and
/// reassembles the complex update. Throws ConfigError on shape mismatch.
CMatrix pn_forward(const Mlp& net, const CMatrix& grad_w);
CMatrix pn_forward(const Mlp& net, const CMatrix& grad_w, Mlp::Tape& tape);

RVector an_forward(const Mlp& net, const RVector& grad_beta);
RVector an_forward(const Mlp& net, const RVector& grad_beta, Mlp::Tape& tape);
RVector tn_forward(const Mlp& net, const RVector& grad_theta);
RVector tn_forward(const Mlp& net, const RVector& grad_theta, Mlp::Tape& tape);

/// First and second moment estimates of one Adam-optimized parameter array.
struct AdamState {
  RVector first_moment;
  RVector second_moment;
  long step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState zeros(std::size_t size);
};

/// One bias-corrected Adam step moving `params` to decrease the loss whose
/// gradient is `grad`. Rejects non-finite gradients with DomainError and
/// leaves params and state untouched in that case.
void adam_step(RVector& params, const RVector& grad, AdamState& state,
               double lr);

// --- checkpoints ----------------------------------------------------------
//
// Text format, one array per record:
//
//   stargml-checkpoint 1
//   <name> <count>
//   <v_0> <v_1> ... <v_{count-1}>
//   ...
//
// Values are written with 17 significant digits, which round-trips IEEE
// binary64 exactly and makes the file independent of host byte order.

struct NamedArray {
  std::string name;
  RVector values;
};

void write_checkpoint(std::ostream& os, const std::vector<NamedArray>& arrays);
std::vector<NamedArray> read_checkpoint(std::istream& is);

/// Arrays "pn", "an", "tn" holding the flat parameters of each network.
std::vector<NamedArray> checkpoint_arrays(const SubNetworks& nets);
/// Inverse of checkpoint_arrays; sizes must match the networks' shapes.
void load_checkpoint_arrays(SubNetworks& nets,
                            const std::vector<NamedArray>& arrays);

}  // namespace stargml
