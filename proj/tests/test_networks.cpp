// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The stargml Authors

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "stargml/errors.hpp"
#include "stargml/networks.hpp"
#include "test_support.hpp"

using namespace stargml;

namespace {

RMatrix random_real(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  RMatrix out(r, c);
  for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] = g(rng);
  return out;
}

CMatrix random_complex(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
  CMatrix out(r, c);
  for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] = testing::complex_normal(rng);
  return out;
}

/// y = W2 relu(W1 x + b1) + b2, one column at a time with explicit loops.
RVector reference_forward(const Mlp& net, const RVector& x) {
  const auto W1 = net.W1();
  const auto W2 = net.W2();
  RVector hidden(W1.rows());
  for (Eigen::Index h = 0; h < W1.rows(); ++h) {
    double acc = net.b1()(h);
    for (Eigen::Index i = 0; i < W1.cols(); ++i) acc += W1(h, i) * x(i);
    hidden(h) = acc > 0.0 ? acc : 0.0;
  }
  RVector y(W2.rows());
  for (Eigen::Index o = 0; o < W2.rows(); ++o) {
    double acc = net.b2()(o);
    for (Eigen::Index h = 0; h < W2.cols(); ++h) acc += W2(o, h) * hidden(h);
    y(o) = acc;
  }
  return y;
}

}  // namespace

TEST_CASE("zero-parameter networks output zero") {
  const auto nets = SubNetworks::zeros(4, 6);
  std::mt19937_64 rng(1);
  CHECK(pn_forward(nets.precoder, random_complex(4, 3, rng)).norm() == 0.0);
  CHECK(an_forward(nets.amplitude, random_real(12, 1, rng).col(0)).norm() == 0.0);
  CHECK(tn_forward(nets.phase, random_real(12, 1, rng).col(0)).norm() == 0.0);
}

TEST_CASE("sub-network shapes") {
  std::mt19937_64 rng(2);
  const auto nets = SubNetworks::random(5, 7, rng);
  CHECK(nets.precoder.input_dim() == 5);
  CHECK(nets.precoder.hidden_dim() == 200);
  CHECK(nets.precoder.output_dim() == 5);
  CHECK(nets.amplitude.input_dim() == 14);
  CHECK(nets.amplitude.hidden_dim() == 300);
  CHECK(nets.amplitude.output_dim() == 14);
  CHECK(nets.phase.input_dim() == 14);
  CHECK(nets.phase.hidden_dim() == 300);
  CHECK(nets.phase.output_dim() == 14);
  CHECK(nets.precoder.parameter_count() == 200 * 5 + 200 + 5 * 200 + 5);

  const auto stacked = SubNetworks::random(5, 7, rng, PnInput::stacked);
  CHECK(stacked.precoder.input_dim() == 10);
  CHECK(stacked.precoder.output_dim() == 10);
}

TEST_CASE("random init: bounded weights, zero biases") {
  std::mt19937_64 rng(3);
  const Mlp net = Mlp::random(6, 20, 4, rng);
  CHECK(net.W1().cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(6.0));
  CHECK(net.W2().cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(20.0));
  CHECK(net.W1().cwiseAbs().maxCoeff() > 0.0);
  CHECK(net.b1().norm() == 0.0);
  CHECK(net.b2().norm() == 0.0);
}

TEST_CASE("forward matches an explicit loop") {
  std::mt19937_64 rng(4);
  Mlp net = Mlp::random(5, 9, 3, rng);
  net.b1() = random_real(9, 1, rng).col(0);
  net.b2() = random_real(3, 1, rng).col(0);
  const RMatrix X = random_real(5, 4, rng);
  const RMatrix Y = net.forward(X);
  for (Eigen::Index c = 0; c < 4; ++c) {
    CHECK((Y.col(c) - reference_forward(net, X.col(c))).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("PN with one user recombines real and imaginary passes") {
  std::mt19937_64 rng(5);
  Mlp net = Mlp::random(4, 200, 4, rng);
  net.b2() = random_real(4, 1, rng).col(0);
  const CMatrix g = random_complex(4, 1, rng);
  const CMatrix out = pn_forward(net, g);
  const RVector re = reference_forward(net, g.real().col(0));
  const RVector im = reference_forward(net, g.imag().col(0));
  CHECK((out.real().col(0) - re).cwiseAbs().maxCoeff() < 1e-13);
  CHECK((out.imag().col(0) - im).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("PN stacked layout feeds [Re; Im] jointly") {
  std::mt19937_64 rng(6);
  const Mlp net = Mlp::random(8, 30, 8, rng);
  const CMatrix g = random_complex(4, 2, rng);
  const CMatrix out = pn_forward(net, g);
  for (Eigen::Index k = 0; k < 2; ++k) {
    RVector x(8);
    x << g.real().col(k), g.imag().col(k);
    const RVector y = reference_forward(net, x);
    CHECK((out.real().col(k) - y.head(4)).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((out.imag().col(k) - y.tail(4)).cwiseAbs().maxCoeff() < 1e-13);
  }
  CHECK_THROWS_AS(pn_forward(net, random_complex(3, 2, rng)), ConfigError);
}

TEST_CASE("property: PN is equivariant to user permutations") {
  std::mt19937_64 rng(7);
  const Mlp net = Mlp::random(6, 200, 6, rng);
  for (int trial = 0; trial < 10; ++trial) {
    const CMatrix g = random_complex(6, 3, rng);
    CMatrix p(6, 3);
    p << g.col(2), g.col(0), g.col(1);
    const CMatrix a = pn_forward(net, g);
    const CMatrix b = pn_forward(net, p);
    CHECK((b.col(0) - a.col(2)).norm() < 1e-14);
    CHECK((b.col(1) - a.col(0)).norm() < 1e-14);
    CHECK((b.col(2) - a.col(1)).norm() < 1e-14);
  }
}

TEST_CASE("rectifier: all-negative pre-activations leave only the output bias") {
  std::mt19937_64 rng(8);
  Mlp net = Mlp::random(6, 10, 6, rng);
  net.W1().setZero();
  net.b1().setConstant(-1.0);
  net.b2() = random_real(6, 1, rng).col(0);
  const RVector x = random_real(6, 1, rng).col(0);
  CHECK((tn_forward(net, x) - net.b2()).norm() == 0.0);
  CHECK((an_forward(net, x) - net.b2()).norm() == 0.0);
}

TEST_CASE("zero input gives the bias-only output") {
  std::mt19937_64 rng(9);
  Mlp net = Mlp::random(6, 10, 6, rng);
  net.b1() = random_real(10, 1, rng).col(0);
  net.b2() = random_real(6, 1, rng).col(0);
  const RVector expected = net.W2() * net.b1().cwiseMax(0.0) + net.b2();
  CHECK((tn_forward(net, RVector::Zero(6)) - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("shape mismatches are configuration errors") {
  std::mt19937_64 rng(10);
  const Mlp net = Mlp::random(6, 10, 6, rng);
  CHECK_THROWS_AS(an_forward(net, RVector::Zero(5)), ConfigError);
  CHECK_THROWS_AS(tn_forward(net, RVector::Zero(7)), ConfigError);
  CHECK_THROWS_AS(pn_forward(net, CMatrix::Zero(4, 2)), ConfigError);
  const Mlp wide = Mlp::random(6, 10, 4, rng);
  CHECK_THROWS_AS(an_forward(wide, RVector::Zero(6)), ConfigError);
  CHECK_THROWS_AS(Mlp(0, 3, 3), ConfigError);
}

TEST_CASE("backward matches finite differences over every parameter") {
  std::mt19937_64 rng(11);
  Mlp net = Mlp::random(4, 7, 3, rng);
  net.b1() = 0.3 * random_real(7, 1, rng).col(0);
  net.b2() = random_real(3, 1, rng).col(0);
  const RMatrix X = random_real(4, 5, rng);
  const RMatrix dY = random_real(3, 5, rng);
  Mlp::Tape tape;
  net.forward(X, tape);
  const RVector grad = net.backward(tape, dY);
  REQUIRE(grad.size() == static_cast<Eigen::Index>(net.parameter_count()));

  auto loss = [&](const Mlp& m) { return (m.forward(X).array() * dY.array()).sum(); };
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < grad.size(); ++i) {
    Mlp plus = net, minus = net;
    plus.parameters()(i) += h;
    minus.parameters()(i) -= h;
    const double fd = (loss(plus) - loss(minus)) / (2 * h);
    CHECK(std::abs(fd - grad(i)) < 1e-7 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("Adam: zero gradient on a fresh state leaves parameters") {
  RVector p = RVector::LinSpaced(5, -1.0, 1.0);
  const RVector before = p;
  auto st = AdamState::zeros(5);
  adam_step(p, RVector::Zero(5), st, 1e-3);
  CHECK(p == before);
  CHECK(st.step_count == 1);
}

TEST_CASE("Adam: first step has magnitude lr and descends") {
  for (double g : {3.0, -0.02, 1e-5}) {
    RVector p = RVector::Constant(1, 0.5);
    auto st = AdamState::zeros(1);
    adam_step(p, RVector::Constant(1, g), st, 1e-3);
    const double expected = 1e-3 * std::abs(g) / (std::abs(g) + 1e-8);
    CHECK(std::abs(0.5 - p(0)) == doctest::Approx(expected).epsilon(1e-9));
    CHECK((p(0) < 0.5) == (g > 0));
  }
}

TEST_CASE("Adam: deterministic, counted and bounded") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g(0.0, 5.0);
  RVector p1 = RVector::Zero(10), p2 = RVector::Zero(10);
  auto s1 = AdamState::zeros(10), s2 = AdamState::zeros(10);
  for (int step = 1; step <= 200; ++step) {
    RVector grad(10);
    for (auto& v : grad) v = g(rng);
    const RVector before = p1;
    adam_step(p1, grad, s1, 1e-2);
    adam_step(p2, grad, s2, 1e-2);
    CHECK(p1 == p2);
    CHECK(s1.step_count == step);
    CHECK((p1 - before).cwiseAbs().maxCoeff() <= 1e-2 * (1 + 1e-6));
  }
}

TEST_CASE("Adam: non-finite gradients are rejected without side effects") {
  RVector p = RVector::Ones(3);
  auto st = AdamState::zeros(3);
  adam_step(p, RVector::Ones(3), st, 1e-3);
  const RVector p_before = p;
  const AdamState s_before = st;
  RVector bad = RVector::Ones(3);
  bad(1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(adam_step(p, bad, st, 1e-3), DomainError);
  bad(1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(adam_step(p, bad, st, 1e-3), DomainError);
  CHECK(p == p_before);
  CHECK(st.step_count == s_before.step_count);
  CHECK(st.first_moment == s_before.first_moment);
  CHECK(st.second_moment == s_before.second_moment);
  CHECK_THROWS_AS(adam_step(p, RVector::Ones(2), st, 1e-3), ConfigError);
  CHECK_THROWS_AS(adam_step(p, RVector::Ones(3), st, 0.0), ConfigError);
}

TEST_CASE("checkpoint round-trip is exact") {
  std::mt19937_64 rng(13);
  const auto nets = SubNetworks::random(3, 4, rng);
  std::stringstream ss;
  write_checkpoint(ss, checkpoint_arrays(nets));
  auto restored = SubNetworks::zeros(3, 4);
  load_checkpoint_arrays(restored, read_checkpoint(ss));
  CHECK(restored.precoder.parameters() == nets.precoder.parameters());
  CHECK(restored.amplitude.parameters() == nets.amplitude.parameters());
  CHECK(restored.phase.parameters() == nets.phase.parameters());

  std::vector<NamedArray> odd{{"x", RVector::Constant(2, 0.1)},
                              {"y", RVector::Constant(1, -1e-308)}};
  std::stringstream s2;
  write_checkpoint(s2, odd);
  const auto back = read_checkpoint(s2);
  REQUIRE(back.size() == 2);
  CHECK(back[0].values == odd[0].values);
  CHECK(back[1].values == odd[1].values);
}

TEST_CASE("malformed checkpoints are rejected") {
  std::stringstream bad_header("not-a-checkpoint 1\n");
  CHECK_THROWS_AS(read_checkpoint(bad_header), ConfigError);
  std::stringstream truncated("stargml-checkpoint 1\npn 3\n1 2\n");
  CHECK_THROWS_AS(read_checkpoint(truncated), ConfigError);

  auto nets = SubNetworks::zeros(2, 2);
  CHECK_THROWS_AS(load_checkpoint_arrays(nets, {{"pn", RVector::Zero(3)}}), ConfigError);
  CHECK_THROWS_AS(load_checkpoint_arrays(nets, {}), ConfigError);
}
