// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The stargml Authors

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Eigenvalues>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "stargml/constraints.hpp"
#include "stargml/errors.hpp"
#include "test_support.hpp"

using namespace stargml;

namespace {

constexpr double kPi = std::numbers::pi;

RVector vec(std::initializer_list<double> v) {
  RVector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

/// Dense form: A = diag(b_t, b_r), Abar = P A P with P swapping the halves,
/// result = (A^T A + Abar^T Abar)^{-1/2} A.
RVector dense_amplitude_projection(const RVector& bt, const RVector& br) {
  const Eigen::Index n = bt.size();
  RMatrix A = RMatrix::Zero(2 * n, 2 * n);
  A.diagonal() << bt, br;
  RMatrix P = RMatrix::Zero(2 * n, 2 * n);
  P.topRightCorner(n, n).setIdentity();
  P.bottomLeftCorner(n, n).setIdentity();
  const RMatrix Abar = P * A * P;
  const RMatrix S = A.transpose() * A + Abar.transpose() * Abar;
  Eigen::SelfAdjointEigenSolver<RMatrix> eig(S);
  const RMatrix inv_sqrt = eig.operatorInverseSqrt();
  return (inv_sqrt * A).diagonal();
}

double deviation(double tt, double tr, double at, double ar) {
  return (at - tt) * (at - tt) + (ar - tr) * (ar - tr);
}

/// Best deviation over the four offsets, scanned independently.
double brute_force_deviation(double tt, double tr) {
  double best = std::numeric_limits<double>::infinity();
  for (double t : {kPi / 2, -kPi / 2, 3 * kPi / 2, -3 * kPi / 2}) {
    const double at = (tt + tr + t) / 2;
    const double ar = (tt + tr - t) / 2;
    best = std::min(best, deviation(tt, tr, at, ar));
  }
  return best;
}

}  // namespace

TEST_CASE("normalize_power examples") {
  CMatrix W = CMatrix::Zero(2, 1);
  W(0, 0) = 1.0;
  W(1, 0) = cdouble(0.0, 1.0);  // trace 2
  const CMatrix out = normalize_power(W, 8.0);
  CHECK((out - 2.0 * W).norm() < 1e-15);

  CMatrix unit = W / std::sqrt(2.0);
  CHECK((normalize_power(unit, 1.0) - unit).norm() < 1e-15);

  std::mt19937_64 rng(1);
  CMatrix R(4, 2);
  for (Eigen::Index i = 0; i < R.size(); ++i) R.data()[i] = stargml::testing::complex_normal(rng);
  const CMatrix n = normalize_power(R, 0.01);
  CHECK(std::abs((n.adjoint() * n).trace().real() - 0.01) / 0.01 < 1e-12);
}

TEST_CASE("normalize_power rejects the zero precoder") {
  CHECK_THROWS_AS(normalize_power(CMatrix::Zero(3, 2), 1.0), DegenerateInputError);
}

TEST_CASE("property: normalize_power is idempotent and keeps direction") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> p(1e-4, 1e3);
  for (int trial = 0; trial < 100; ++trial) {
    CMatrix R(5, 3);
    for (Eigen::Index i = 0; i < R.size(); ++i) R.data()[i] = stargml::testing::complex_normal(rng);
    const double pm = p(rng);
    const CMatrix once = normalize_power(R, pm);
    const CMatrix twice = normalize_power(once, pm);
    CHECK((twice - once).cwiseAbs().maxCoeff() < 1e-12 * once.cwiseAbs().maxCoeff());
    CHECK((once / once.norm() - R / R.norm()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(once.squaredNorm() - pm) / pm < 1e-12);
  }
}

TEST_CASE("normalize_amplitudes examples match the dense form") {
  auto [t, r] = normalize_amplitudes(vec({3, 1, 0}), vec({4, 1, 2}));
  CHECK(t(0) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(r(0) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(t(1) == doctest::Approx(std::sqrt(2.0) / 2).epsilon(1e-15));
  CHECK(r(1) == doctest::Approx(std::sqrt(2.0) / 2).epsilon(1e-15));
  CHECK(t(2) == 0.0);
  CHECK(r(2) == doctest::Approx(1.0).epsilon(1e-15));

  const RVector dense = dense_amplitude_projection(vec({3, 1, 0}), vec({4, 1, 2}));
  for (Eigen::Index i = 0; i < 3; ++i) {
    CHECK(std::abs(t(i) - dense(i)) < 1e-12);
    CHECK(std::abs(r(i) - dense(3 + i)) < 1e-12);
  }
}

TEST_CASE("normalize_amplitudes rejects a zero pair") {
  CHECK_THROWS_AS(normalize_amplitudes(vec({1, 0}), vec({1, 0})), DegenerateInputError);
  CHECK_THROWS_AS(normalize_amplitudes(vec({1}), vec({1, 1})), ConfigError);
}

TEST_CASE("property: normalize_amplitudes") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    RVector bt(8), br(8);
    for (Eigen::Index i = 0; i < 8; ++i) {
      bt(i) = g(rng);
      br(i) = g(rng);
    }
    const auto [t, r] = normalize_amplitudes(bt, br);
    const auto [t2, r2] = normalize_amplitudes(t, r);
    const RVector dense = dense_amplitude_projection(bt, br);
    for (Eigen::Index i = 0; i < 8; ++i) {
      CHECK(std::abs(t(i) * t(i) + r(i) * r(i) - 1.0) < 1e-12);
      CHECK(std::abs(t2(i) - t(i)) < 1e-12);
      CHECK(std::abs(r2(i) - r(i)) < 1e-12);
      CHECK(std::signbit(t(i)) == std::signbit(bt(i)));
      CHECK(std::signbit(r(i)) == std::signbit(br(i)));
      CHECK(std::abs(t(i) / r(i) - bt(i) / br(i)) <= 1e-12 * std::abs(bt(i) / br(i)));
      CHECK(std::abs(t(i) - dense(i)) < 1e-12);
      CHECK(std::abs(r(i) - dense(8 + i)) < 1e-12);
    }
  }
}

TEST_CASE("regulate_phase_delta examples") {
  const RVector out = regulate_phase_delta(vec({0.0, std::log(3.0), 50.0, -50.0}));
  CHECK(out(0) == doctest::Approx(kPi).epsilon(1e-15));
  CHECK(out(1) == doctest::Approx(1.5 * kPi).epsilon(1e-14));
  CHECK(out(2) < 2 * kPi);
  CHECK(out(2) > 2 * kPi - 1e-12);
  CHECK(out(3) > 0.0);
  RegulatorConfig half{kPi};
  CHECK(regulate_phase_delta(vec({0.0}), half)(0) == doctest::Approx(kPi / 2));
}

TEST_CASE("property: regulator range and monotonicity") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> x(-30.0, 30.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const double a = x(rng);
    const double b = a + std::abs(x(rng)) / 10 + 1e-3;
    const RVector out = regulate_phase_delta(vec({a, b}));
    CHECK(out(0) > 0.0);
    CHECK(out(1) < 2 * kPi);
    CHECK(out(0) < out(1));
  }
  const RVector extreme = regulate_phase_delta(vec({-700.0, 700.0, -1e308}));
  CHECK(extreme.allFinite());
  CHECK(extreme(0) >= 0.0);
  CHECK(extreme(1) <= 2 * kPi);
}

TEST_CASE("apply_phase_delta wraps") {
  const RVector out = apply_phase_delta(vec({1.5 * kPi, 0.0}), vec({kPi, kPi}));
  CHECK(out(0) == doctest::Approx(kPi / 2).epsilon(1e-14));
  CHECK(out(1) == doctest::Approx(kPi).epsilon(1e-15));
  CHECK(wrap_phase(-0.5) == doctest::Approx(2 * kPi - 0.5));
  CHECK(wrap_phase(2 * kPi) == 0.0);
  CHECK(wrap_phase(-1e-300) < 2 * kPi);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> th(0.0, 2 * kPi), d(1e-9, 2 * kPi - 1e-9);
  for (int trial = 0; trial < 1000; ++trial) {
    const double t = th(rng), delta = d(rng);
    const double o = apply_phase_delta(vec({t}), vec({delta}))(0);
    CHECK(o >= 0.0);
    CHECK(o < 2 * kPi);
    CHECK(std::abs(std::polar(1.0, o) - std::polar(1.0, t) * std::polar(1.0, delta)) < 1e-12);
  }
}

TEST_CASE("project_coupled_phases examples") {
  auto a = project_coupled_phases(vec({kPi / 2}), vec({0.0}));
  CHECK(a.theta_t_aux(0) == doctest::Approx(kPi / 2).epsilon(1e-15));
  CHECK(std::abs(a.theta_r_aux(0)) < 1e-15);

  a = project_coupled_phases(vec({0.0}), vec({0.0}));
  CHECK(a.theta_t_aux(0) == doctest::Approx(kPi / 4).epsilon(1e-15));
  CHECK(a.theta_r_aux(0) == doctest::Approx(-kPi / 4).epsilon(1e-15));

  a = project_coupled_phases(vec({kPi}), vec({kPi}));
  CHECK(a.theta_t_aux(0) == doctest::Approx(5 * kPi / 4).epsilon(1e-15));
  CHECK(a.theta_r_aux(0) == doctest::Approx(3 * kPi / 4).epsilon(1e-15));
}

TEST_CASE("property: coupled projection is exact and never beaten") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> th(-4 * kPi, 4 * kPi);
  for (int trial = 0; trial < 2000; ++trial) {
    const double tt = th(rng), tr = th(rng);
    const auto a = project_coupled_phases(vec({tt}), vec({tr}));
    const double at = a.theta_t_aux(0), ar = a.theta_r_aux(0);
    CHECK(std::abs(std::cos(at - ar)) < 1e-12);
    CHECK(deviation(tt, tr, at, ar) <= brute_force_deviation(tt, tr) * (1 + 1e-12) + 1e-15);
    CHECK(coupling_residual(a.theta_t_aux, a.theta_r_aux)(0) < 1e-12);
  }
}

TEST_CASE("coupling_residual and penalty") {
  const RVector r = coupling_residual(vec({kPi / 2, 0.0, kPi / 3}), vec({0.0, 0.0, 0.0}));
  CHECK(r(0) < 1e-15);
  CHECK(r(1) == doctest::Approx(1.0));
  CHECK(r(2) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(coupling_penalty(vec({kPi / 2}), vec({0.0})) < 1e-30);
  CHECK(coupling_penalty(vec({0.0}), vec({0.0})) == doctest::Approx(kPi * kPi / 8));
}
