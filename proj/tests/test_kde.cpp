// Copyright 2026 The nmqtraj Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <complex>
#include <random>

#include <doctest.h>

#include "nmqt/errors.hpp"
#include "nmqt/kde.hpp"

namespace {

using nmqt::Complex;
using nmqt::EnsembleSnapshot;
using nmqt::KdeContext;
using nmqt::StateVector;

EnsembleSnapshot random_snapshot(Eigen::Index dim, Eigen::Index count, unsigned seed,
                                 double spread = 1.0) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> n(0.0, spread);
  EnsembleSnapshot snap;
  snap.states.resize(dim, count);
  for (Eigen::Index c = 0; c < count; ++c) {
    for (Eigen::Index r = 0; r < dim; ++r) {
      snap.states(r, c) = Complex(n(gen), n(gen));
    }
  }
  return snap;
}

StateVector random_state(Eigen::Index dim, unsigned seed, double spread = 1.0) {
  return random_snapshot(dim, 1, seed, spread).states.col(0);
}

}  // namespace

TEST_CASE("bandwidth rule of thumb") {
  // M = 3000 two-component complex states: d = 4 real dimensions, exponent -1/9.
  CHECK(nmqt::kde_bandwidth(3000, 2) == std::pow(3000.0, -1.0 / 9.0));
  CHECK(nmqt::kde_bandwidth(3000, 2) == doctest::Approx(0.4107).epsilon(2e-4));

  // Monotone shrinkage with ensemble size.
  CHECK(nmqt::kde_bandwidth(10, 2) > nmqt::kde_bandwidth(100, 2));
  CHECK(nmqt::kde_bandwidth(100, 2) > nmqt::kde_bandwidth(1000, 2));

  CHECK_THROWS_AS(nmqt::kde_bandwidth(1, 2), nmqt::ConfigError);
  CHECK_THROWS_AS(nmqt::kde_bandwidth(100, 0), nmqt::ConfigError);
}

TEST_CASE("context construction guards") {
  EnsembleSnapshot empty;
  empty.states.resize(2, 0);
  CHECK_THROWS_AS(KdeContext(empty, 0.5), nmqt::ConfigError);

  const EnsembleSnapshot snap = random_snapshot(2, 3, 1);
  CHECK_THROWS_AS(KdeContext(snap, 0.0), nmqt::ConfigError);
  CHECK_THROWS_AS(KdeContext(snap, -0.3), nmqt::ConfigError);

  const KdeContext ctx(snap, 0.5);
  CHECK_THROWS_AS(ctx.density(random_state(3, 2)), nmqt::ConfigError);
}

TEST_CASE("single-sample density is the bare kernel") {
  const double sigma = 0.7;
  EnsembleSnapshot snap;
  snap.states.resize(2, 1);
  snap.states(0, 0) = Complex(1.0, 0.0);
  snap.states(1, 0) = Complex(0.0, 0.0);
  const KdeContext ctx(snap, sigma);

  const double z_norm = std::pow(M_PI * sigma * sigma, 2.0);  // (pi sigma^2)^D, D=2
  CHECK(ctx.density(snap.states.col(0)) == doctest::Approx(1.0 / z_norm).epsilon(1e-13));

  StateVector off(2);
  off << Complex(1.0, 0.0), Complex(0.0, 0.3);  // squared distance 0.09
  CHECK(ctx.density(off) ==
        doctest::Approx(std::exp(-0.09 / (sigma * sigma)) / z_norm).epsilon(1e-13));
}

TEST_CASE("two symmetric samples: density at the midpoint, gradient cancels") {
  const double sigma = 0.8;
  EnsembleSnapshot snap;
  snap.states.resize(1, 2);
  snap.states(0, 0) = Complex(0.4, 0.2);
  snap.states(0, 1) = Complex(-0.4, -0.2);
  const KdeContext ctx(snap, sigma);

  const double dist2 = std::norm(Complex(0.4, 0.2));
  StateVector origin = StateVector::Zero(1);
  const double expected = std::exp(-dist2 / (sigma * sigma)) / (M_PI * sigma * sigma);
  CHECK(ctx.density(origin) == doctest::Approx(expected).epsilon(1e-13));

  const auto grad = ctx.log_density_gradient(origin);
  CHECK_FALSE(grad.far_from_ensemble);
  CHECK(std::abs(grad.gradient[0]) < 1e-15);
}

TEST_CASE("density integrates to one over the complex plane") {
  // D = 1: quadrature over the two real coordinates on a box that holds all
  // of the mass (samples inside the unit disk, sigma = 0.5, box half-width 4).
  const EnsembleSnapshot snap = random_snapshot(1, 5, 7, 0.4);
  const double sigma = 0.5;
  const KdeContext ctx(snap, sigma);

  const double half = 4.0;
  const int cells = 160;
  const double h = 2.0 * half / cells;
  double integral = 0.0;
  for (int ix = 0; ix < cells; ++ix) {
    const double x = -half + (ix + 0.5) * h;
    for (int iy = 0; iy < cells; ++iy) {
      const double y = -half + (iy + 0.5) * h;
      StateVector q(1);
      q << Complex(x, y);
      integral += ctx.density(q);
    }
  }
  integral *= h * h;
  CHECK(integral == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("ratio: identity, single-kernel closed form, quotient agreement") {
  const double sigma = 0.6;

  SUBCASE("target equal to source") {
    const KdeContext ctx(random_snapshot(2, 20, 3), sigma);
    const StateVector q = random_state(2, 4);
    const auto r = ctx.density_ratio(q, q);
    CHECK_FALSE(r.far_from_ensemble);
    CHECK(r.value == doctest::Approx(1.0).epsilon(1e-15));
  }

  SUBCASE("single sample closed form") {
    EnsembleSnapshot snap = random_snapshot(2, 1, 5);
    const KdeContext ctx(snap, sigma);
    const StateVector t = random_state(2, 6);
    const StateVector s = random_state(2, 7);
    const double expected = std::exp(
        ((s - snap.states.col(0)).squaredNorm() - (t - snap.states.col(0)).squaredNorm()) /
        (sigma * sigma));
    const auto r = ctx.density_ratio(t, s);
    CHECK_FALSE(r.far_from_ensemble);
    CHECK(r.value == doctest::Approx(expected).epsilon(1e-12));
  }

  SUBCASE("matches the two-call quotient on a 100-sample snapshot") {
    const KdeContext ctx(random_snapshot(2, 100, 8), nmqt::kde_bandwidth(100, 2));
    for (unsigned seed : {10u, 11u, 12u}) {
      const StateVector t = random_state(2, seed);
      const StateVector s = random_state(2, seed + 100);
      const auto r = ctx.density_ratio(t, s);
      CHECK_FALSE(r.far_from_ensemble);
      CHECK(r.value == doctest::Approx(ctx.density(t) / ctx.density(s)).epsilon(1e-12));
      // Reciprocity.
      const auto back = ctx.density_ratio(s, t);
      CHECK(r.value * back.value == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("ratio batch shares one source evaluation") {
  const KdeContext ctx(random_snapshot(2, 50, 21), 0.55);
  const StateVector source = random_state(2, 22);
  Eigen::MatrixXcd targets(2, 4);
  for (int k = 0; k < 4; ++k) targets.col(k) = random_state(2, 30 + static_cast<unsigned>(k));

  const auto batch = ctx.density_ratios(targets, source);
  CHECK_FALSE(batch.far_from_ensemble);
  REQUIRE(batch.values.size() == 4);
  for (int k = 0; k < 4; ++k) {
    const auto single = ctx.density_ratio(targets.col(k), source);
    CHECK(batch.values[k] == doctest::Approx(single.value).epsilon(1e-12));
  }
}

TEST_CASE("queries far outside the support are flagged, not extrapolated") {
  const EnsembleSnapshot snap = random_snapshot(2, 30, 40, 0.5);
  const double sigma = 0.3;
  const KdeContext ctx(snap, sigma);

  StateVector far = StateVector::Constant(2, Complex(40.0, 0.0));
  CHECK(ctx.density(far) == 0.0);

  const auto r = ctx.density_ratio(random_state(2, 41), far);
  CHECK(r.far_from_ensemble);
  CHECK(r.value == 0.0);

  const auto g = ctx.log_density_gradient(far);
  CHECK(g.far_from_ensemble);
  CHECK(g.gradient.norm() == 0.0);

  // A far *target* with a supported source is a legitimate tiny ratio, not a
  // flag: the flag protects the denominator only.
  const auto tiny = ctx.density_ratio(far, snap.states.col(0));
  CHECK_FALSE(tiny.far_from_ensemble);
  CHECK(tiny.value >= 0.0);
  CHECK(tiny.value < 1e-300);
}

TEST_CASE("log gradient: single kernel, mean-shift consistency, purity") {
  const double sigma = 0.6;

  SUBCASE("single sample") {
    EnsembleSnapshot snap = random_snapshot(2, 1, 50);
    const KdeContext ctx(snap, sigma);
    const StateVector q = random_state(2, 51);
    const auto g = ctx.log_density_gradient(q);
    const Eigen::VectorXcd expected = -(q - snap.states.col(0)) / (sigma * sigma);
    CHECK((g.gradient - expected).norm() < 1e-13);
  }

  SUBCASE("hand-built softmax weights") {
    const EnsembleSnapshot snap = random_snapshot(2, 6, 52);
    const KdeContext ctx(snap, sigma);
    const StateVector q = random_state(2, 53, 0.5);

    Eigen::ArrayXd w(6);
    for (Eigen::Index nu = 0; nu < 6; ++nu) {
      w[nu] = std::exp(-(q - snap.states.col(nu)).squaredNorm() / (sigma * sigma));
    }
    w /= w.sum();
    Eigen::VectorXcd mean = Eigen::VectorXcd::Zero(2);
    for (Eigen::Index nu = 0; nu < 6; ++nu) {
      mean += w[nu] * snap.states.col(nu);
    }
    const Eigen::VectorXcd expected = -(q - mean) / (sigma * sigma);
    const auto g = ctx.log_density_gradient(q);
    CHECK((g.gradient - expected).norm() < 1e-12);
  }

  SUBCASE("repeat queries return identical bits") {
    const KdeContext ctx(random_snapshot(2, 25, 54), sigma);
    const StateVector q = random_state(2, 55);
    const double d1 = ctx.density(q);
    const auto g1 = ctx.log_density_gradient(q);
    const auto r1 = ctx.density_ratio(q, ctx.snapshot().states.col(3));
    const double d2 = ctx.density(q);
    const auto g2 = ctx.log_density_gradient(q);
    const auto r2 = ctx.density_ratio(q, ctx.snapshot().states.col(3));
    CHECK(d1 == d2);
    CHECK((g1.gradient - g2.gradient).norm() == 0.0);
    CHECK(r1.value == r2.value);
  }
}

TEST_CASE("log gradient matches Wirtinger finite differences") {
  // d/d psi_n^* = (d/dx_n + i d/dy_n)/2 applied to ln density, central
  // differences with step 1e-5.
  const EnsembleSnapshot snap = random_snapshot(2, 50, 60, 0.7);
  const double sigma = 0.6;
  const KdeContext ctx(snap, sigma);
  const double h = 1e-5;

  for (unsigned seed : {61u, 62u, 63u}) {
    const StateVector q = random_state(2, seed, 0.6);
    const auto g = ctx.log_density_gradient(q);
    REQUIRE_FALSE(g.far_from_ensemble);

    for (Eigen::Index n = 0; n < 2; ++n) {
      StateVector plus = q, minus = q;
      plus[n] += Complex(h, 0.0);
      minus[n] -= Complex(h, 0.0);
      const double dfdx = (std::log(ctx.density(plus)) - std::log(ctx.density(minus))) / (2 * h);
      plus = q;
      minus = q;
      plus[n] += Complex(0.0, h);
      minus[n] -= Complex(0.0, h);
      const double dfdy = (std::log(ctx.density(plus)) - std::log(ctx.density(minus))) / (2 * h);
      const Complex fd = 0.5 * Complex(dfdx, dfdy);
      CHECK(std::abs(g.gradient[n] - fd) < 1e-6);
    }
  }
}
