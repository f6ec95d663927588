// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The stargml Authors

#include "stargml/networks.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "stargml/errors.hpp"

namespace stargml {

namespace {

Eigen::Index idx(std::size_t n) { return static_cast<Eigen::Index>(n); }

}  // namespace

Mlp::Mlp(std::size_t input_dim, std::size_t hidden_dim, std::size_t output_dim)
    : in_(input_dim), hidden_(hidden_dim), out_(output_dim) {
  if (in_ == 0 || hidden_ == 0 || out_ == 0) {
    throw ConfigError("network dimensions must be positive");
  }
  params_ = RVector::Zero(idx(parameter_count()));
}

Mlp Mlp::random(std::size_t input_dim, std::size_t hidden_dim,
                std::size_t output_dim, std::mt19937_64& rng) {
  Mlp net(input_dim, hidden_dim, output_dim);
  auto fill = [&rng](double* data, Eigen::Index size, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index i = 0; i < size; ++i) data[i] = dist(rng);
  };
  fill(net.W1().data(), net.W1().size(), input_dim);
  fill(net.W2().data(), net.W2().size(), hidden_dim);
  return net;
}

std::size_t Mlp::parameter_count() const {
  return hidden_ * in_ + hidden_ + out_ * hidden_ + out_;
}

Eigen::Map<const RMatrix> Mlp::W1() const {
  return {params_.data(), idx(hidden_), idx(in_)};
}
Eigen::Map<const RVector> Mlp::b1() const {
  return {params_.data() + hidden_ * in_, idx(hidden_)};
}
Eigen::Map<const RMatrix> Mlp::W2() const {
  return {params_.data() + hidden_ * in_ + hidden_, idx(out_), idx(hidden_)};
}
Eigen::Map<const RVector> Mlp::b2() const {
  return {params_.data() + hidden_ * in_ + hidden_ + out_ * hidden_, idx(out_)};
}
Eigen::Map<RMatrix> Mlp::W1() { return {params_.data(), idx(hidden_), idx(in_)}; }
Eigen::Map<RVector> Mlp::b1() {
  return {params_.data() + hidden_ * in_, idx(hidden_)};
}
Eigen::Map<RMatrix> Mlp::W2() {
  return {params_.data() + hidden_ * in_ + hidden_, idx(out_), idx(hidden_)};
}
Eigen::Map<RVector> Mlp::b2() {
  return {params_.data() + hidden_ * in_ + hidden_ + out_ * hidden_, idx(out_)};
}

RMatrix Mlp::forward(const RMatrix& X) const {
  Tape tape;
  return forward(X, tape);
}

RMatrix Mlp::forward(const RMatrix& X, Tape& tape) const {
  if (X.rows() != idx(in_)) {
    throw ConfigError("network input has " + std::to_string(X.rows()) +
                      " rows, expected " + std::to_string(in_));
  }
  tape.input = X;
  tape.pre_activation = (W1() * X).colwise() + b1();
  return (W2() * tape.pre_activation.cwiseMax(0.0)).colwise() + b2();
}

RVector Mlp::backward(const Tape& tape, const RMatrix& dY) const {
  if (dY.rows() != idx(out_) || dY.cols() != tape.input.cols()) {
    throw ConfigError("upstream gradient shape does not match the tape");
  }
  const RMatrix hidden = tape.pre_activation.cwiseMax(0.0);
  const RMatrix d_pre =
      (W2().transpose() * dY).cwiseProduct(
          (tape.pre_activation.array() > 0.0).cast<double>().matrix());

  RVector grad(idx(parameter_count()));
  Eigen::Index offset = 0;
  auto put = [&](const RMatrix& block) {
    grad.segment(offset, block.size()) =
        Eigen::Map<const RVector>(block.data(), block.size());
    offset += block.size();
  };
  put(d_pre * tape.input.transpose());
  put(d_pre.rowwise().sum());
  put(dY * hidden.transpose());
  put(dY.rowwise().sum());
  return grad;
}

SubNetworks SubNetworks::random(std::size_t M, std::size_t N,
                                std::mt19937_64& rng, PnInput pn_input) {
  const std::size_t pn_dim = pn_input == PnInput::split ? M : 2 * M;
  SubNetworks nets;
  nets.precoder = Mlp::random(pn_dim, kPrecoderHidden, pn_dim, rng);
  nets.amplitude = Mlp::random(2 * N, kAmplitudeHidden, 2 * N, rng);
  nets.phase = Mlp::random(2 * N, kPhaseHidden, 2 * N, rng);
  return nets;
}

SubNetworks SubNetworks::zeros(std::size_t M, std::size_t N,
                              PnInput pn_input) {
  const std::size_t pn_dim = pn_input == PnInput::split ? M : 2 * M;
  return {Mlp(pn_dim, kPrecoderHidden, pn_dim), Mlp(2 * N, kAmplitudeHidden, 2 * N),
          Mlp(2 * N, kPhaseHidden, 2 * N)};
}

RMatrix complex_to_batch(const CMatrix& Z, PnInput layout) {
  if (layout == PnInput::stacked) {
    RMatrix batch(2 * Z.rows(), Z.cols());
    batch.topRows(Z.rows()) = Z.real();
    batch.bottomRows(Z.rows()) = Z.imag();
    return batch;
  }
  RMatrix batch(Z.rows(), 2 * Z.cols());
  batch.leftCols(Z.cols()) = Z.real();
  batch.rightCols(Z.cols()) = Z.imag();
  return batch;
}

CMatrix batch_to_complex(const RMatrix& batch, PnInput layout) {
  if (layout == PnInput::stacked) {
    const Eigen::Index M = batch.rows() / 2;
    CMatrix Z(M, batch.cols());
    Z.real() = batch.topRows(M);
    Z.imag() = batch.bottomRows(M);
    return Z;
  }
  const Eigen::Index K = batch.cols() / 2;
  CMatrix Z(batch.rows(), K);
  Z.real() = batch.leftCols(K);
  Z.imag() = batch.rightCols(K);
  return Z;
}

PnInput pn_layout(const Mlp& net, Eigen::Index M) {
  const auto in = static_cast<Eigen::Index>(net.input_dim());
  if (in == M) return PnInput::split;
  if (in == 2 * M) return PnInput::stacked;
  throw ConfigError("precoder network input must be M or 2M");
}

CMatrix pn_forward(const Mlp& net, const CMatrix& grad_w) {
  Mlp::Tape tape;
  return pn_forward(net, grad_w, tape);
}

CMatrix pn_forward(const Mlp& net, const CMatrix& grad_w, Mlp::Tape& tape) {
  if (net.output_dim() != net.input_dim()) {
    throw ConfigError("precoder network must map M to M");
  }
  const PnInput layout = pn_layout(net, grad_w.rows());
  return batch_to_complex(net.forward(complex_to_batch(grad_w, layout), tape),
                          layout);
}

namespace {

RVector vector_forward(const Mlp& net, const RVector& x, Mlp::Tape& tape) {
  if (net.output_dim() != static_cast<std::size_t>(x.size())) {
    throw ConfigError("network output must match its 2N input");
  }
  return net.forward(x, tape).col(0);
}

}  // namespace

RVector an_forward(const Mlp& net, const RVector& grad_beta) {
  Mlp::Tape tape;
  return vector_forward(net, grad_beta, tape);
}
RVector an_forward(const Mlp& net, const RVector& grad_beta, Mlp::Tape& tape) {
  return vector_forward(net, grad_beta, tape);
}
RVector tn_forward(const Mlp& net, const RVector& grad_theta) {
  Mlp::Tape tape;
  return vector_forward(net, grad_theta, tape);
}
RVector tn_forward(const Mlp& net, const RVector& grad_theta, Mlp::Tape& tape) {
  return vector_forward(net, grad_theta, tape);
}

AdamState AdamState::zeros(std::size_t size) {
  AdamState s;
  s.first_moment = RVector::Zero(idx(size));
  s.second_moment = RVector::Zero(idx(size));
  return s;
}

void adam_step(RVector& params, const RVector& grad, AdamState& state,
               double lr) {
  if (params.size() != grad.size() ||
      state.first_moment.size() != params.size() ||
      state.second_moment.size() != params.size()) {
    throw ConfigError("Adam: parameter, gradient and moment sizes differ");
  }
  if (!(lr > 0.0)) throw ConfigError("Adam: learning rate must be positive");
  if (!grad.allFinite()) {
    throw DomainError("Adam: non-finite gradient rejected");
  }
  state.step_count += 1;
  const auto t = static_cast<double>(state.step_count);
  state.first_moment = state.beta1 * state.first_moment + (1.0 - state.beta1) * grad;
  state.second_moment = state.beta2 * state.second_moment +
                        (1.0 - state.beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  params.array() -= lr * (state.first_moment.array() / c1) /
                    ((state.second_moment.array() / c2).sqrt() + state.epsilon);
}

void write_checkpoint(std::ostream& os, const std::vector<NamedArray>& arrays) {
  os << "stargml-checkpoint 1\n";
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& a : arrays) {
    if (a.name.empty() || a.name.find_first_of(" \t\n") != std::string::npos) {
      throw ConfigError("checkpoint array names must be non-empty words");
    }
    os << a.name << ' ' << a.values.size() << '\n';
    for (Eigen::Index i = 0; i < a.values.size(); ++i) {
      os << (i ? " " : "") << a.values[i];
    }
    os << '\n';
  }
}

std::vector<NamedArray> read_checkpoint(std::istream& is) {
  std::string magic;
  int version = 0;
  if (!(is >> magic >> version) || magic != "stargml-checkpoint" || version != 1) {
    throw ConfigError("not a stargml checkpoint (version 1)");
  }
  std::vector<NamedArray> arrays;
  std::string name;
  long count = 0;
  while (is >> name >> count) {
    if (count < 0) throw ConfigError("negative array length in checkpoint");
    NamedArray a{name, RVector(count)};
    for (long i = 0; i < count; ++i) {
      if (!(is >> a.values[i])) {
        throw ConfigError("truncated checkpoint array '" + name + "'");
      }
    }
    arrays.push_back(std::move(a));
  }
  return arrays;
}

std::vector<NamedArray> checkpoint_arrays(const SubNetworks& nets) {
  return {{"pn", nets.precoder.parameters()},
          {"an", nets.amplitude.parameters()},
          {"tn", nets.phase.parameters()}};
}

void load_checkpoint_arrays(SubNetworks& nets,
                            const std::vector<NamedArray>& arrays) {
  auto assign = [&](const std::string& name, Mlp& net) {
    for (const auto& a : arrays) {
      if (a.name != name) continue;
      if (a.values.size() != net.parameters().size()) {
        throw ConfigError("checkpoint array '" + name + "' has wrong size");
      }
      net.parameters() = a.values;
      return;
    }
    throw ConfigError("checkpoint lacks array '" + name + "'");
  };
  assign("pn", nets.precoder);
  assign("an", nets.amplitude);
  assign("tn", nets.phase);
}

}  // namespace stargml
