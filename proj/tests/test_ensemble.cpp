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

#include <atomic>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <doctest.h>

#include "nmqt/drift.hpp"
#include "nmqt/ensemble.hpp"
#include "nmqt/errors.hpp"
#include "nmqt/jump.hpp"
#include "nmqt/linalg.hpp"
#include "nmqt/parallel.hpp"
#include "nmqt/qsd.hpp"
#include "nmqt/rng.hpp"

namespace {

using nmqt::Complex;
using nmqt::Method;
using nmqt::RunConfig;
using nmqt::StateVector;

RunConfig base_config(Method method) {
  RunConfig config;
  config.method = method;
  config.system = nmqt::make_two_level_system(2.0, 0.5);
  config.bath = nmqt::BathSpec{0.8, 1.0, 5.5};
  config.initial_state = nmqt::plus_state();
  config.observables = {{"sigma_x", nmqt::sigma_x()}, {"sigma_z", nmqt::sigma_z()}};
  config.ensemble_size = 8;
  config.dt = 1e-3;
  config.t_end = 0.05;
  config.seed = 11;
  config.workers = 1;
  return config;
}

}  // namespace

TEST_CASE("parallel_for: coverage, clamping, and error propagation") {
  // Every index is visited exactly once regardless of worker count.
  for (unsigned workers : {0u, 1u, 3u, 7u, 64u}) {
    std::vector<std::atomic<int>> hits(23);
    nmqt::parallel_for(0, 23, workers, [&](std::size_t lo, std::size_t hi) {
      REQUIRE(lo <= hi);
      for (std::size_t i = lo; i < hi; ++i) hits[i].fetch_add(1);
    });
    for (const auto& h : hits) CHECK(h.load() == 1);
  }

  // Empty range: the body never runs.
  bool ran = false;
  nmqt::parallel_for(5, 5, 4, [&](std::size_t, std::size_t) { ran = true; });
  CHECK_FALSE(ran);

  // A worker exception surfaces on the calling thread after the join.
  CHECK_THROWS_AS(nmqt::parallel_for(0, 16, 4,
                                     [](std::size_t lo, std::size_t) {
                                       if (lo >= 8) throw std::runtime_error("boom");
                                     }),
                  std::runtime_error);
}

TEST_CASE("method names round-trip through the parser") {
  for (Method m : {Method::jump, Method::diffusion, Method::qsd, Method::master}) {
    CHECK(nmqt::parse_method(nmqt::method_name(m)) == m);
  }
  CHECK_THROWS_AS(nmqt::parse_method("markov"), nmqt::ConfigError);
}

TEST_CASE("run config validation catches malformed setups") {
  RunConfig ok = base_config(Method::jump);
  CHECK_NOTHROW(ok.validate());
  CHECK(ok.steps() == 50);

  RunConfig bad = ok;
  bad.dt = 0.0;
  CHECK_THROWS_AS(bad.validate(), nmqt::ConfigError);

  bad = ok;
  bad.t_end = -1.0;
  CHECK_THROWS_AS(bad.validate(), nmqt::ConfigError);

  bad = ok;
  bad.dt = 0.3;
  bad.t_end = 1.0;  // not an integer number of steps
  CHECK_THROWS_AS(bad.steps(), nmqt::ConfigError);

  bad = ok;
  bad.ensemble_size = 0;
  CHECK_THROWS_AS(bad.validate(), nmqt::ConfigError);

  // The ensemble-coupled methods need at least two trajectories; the
  // decoupled ones are fine with one.
  bad = ok;
  bad.ensemble_size = 1;
  CHECK_THROWS_AS(bad.validate(), nmqt::ConfigError);
  bad.method = Method::diffusion;
  CHECK_THROWS_AS(bad.validate(), nmqt::ConfigError);
  bad.method = Method::qsd;
  CHECK_NOTHROW(bad.validate());
  bad.method = Method::master;
  CHECK_NOTHROW(bad.validate());

  bad = ok;
  bad.epsilon = 0.0;
  CHECK_THROWS_AS(bad.validate(), nmqt::ConfigError);

  bad = ok;
  bad.m_channels = 1;
  CHECK_THROWS_AS(bad.validate(), nmqt::ConfigError);

  bad = ok;
  bad.initial_state = StateVector::Zero(3);
  CHECK_THROWS_AS(bad.validate(), nmqt::ConfigError);

  bad = ok;
  bad.initial_state = StateVector::Zero(2);
  CHECK_THROWS_AS(bad.validate(), nmqt::ConfigError);

  bad = ok;
  bad.observables[0].name.clear();
  CHECK_THROWS_AS(bad.validate(), nmqt::ConfigError);

  bad = ok;
  bad.observables[0].op = nmqt::OperatorMatrix::Zero(3, 3);
  CHECK_THROWS_AS(bad.validate(), nmqt::ConfigError);

  bad = ok;
  bad.observables[0].op = nmqt::sigma_minus();  // not Hermitian
  CHECK_THROWS_AS(bad.validate(), nmqt::ConfigError);

  bad = ok;
  bad.kde_bandwidth_override = 0.0;
  CHECK_THROWS_AS(bad.validate(), nmqt::ConfigError);
}

TEST_CASE("master method delegates to the deterministic integrator") {
  RunConfig config = base_config(Method::master);
  config.t_end = 1.0;
  const auto result = nmqt::run_ensemble(config);
  const auto& series = result.series;

  REQUIRE(series.size() == 1001);
  CHECK(series.times.front() == 0.0);
  CHECK(series.times.back() == doctest::Approx(1.0).epsilon(1e-12));
  REQUIRE(series.names.size() == 2);
  CHECK(series.names[0] == "sigma_x");
  CHECK(series.names[1] == "sigma_z");

  // Reference: integrate the master equation directly on the same grids.
  const auto rates = nmqt::solve_rate_function(config.bath, config.system.omega, 1.0, 5e-4);
  StateVector psi0 = config.initial_state / config.initial_state.norm();
  const nmqt::DensityMatrix rho0 = psi0 * psi0.adjoint();
  const auto rhos = nmqt::integrate_master(rho0, config.system, rates, config.dt, 1000);
  for (std::size_t j : {std::size_t{0}, std::size_t{500}, std::size_t{1000}}) {
    const double tr = rhos[j].trace().real();
    const double sx = (nmqt::sigma_x() * rhos[j]).trace().real() / tr;
    const double sz = (nmqt::sigma_z() * rhos[j]).trace().real() / tr;
    CHECK(std::abs(series.estimates[0][j] - sx) < 1e-12);
    CHECK(std::abs(series.estimates[1][j] - sz) < 1e-12);
    CHECK(std::abs(series.trace[j] - tr) < 1e-12);
    // The deterministic reference has no sampling error.
    CHECK(series.standard_errors[0][j] == 0.0);
    CHECK(series.trace_se[j] == 0.0);
    CHECK(series.flagged_fraction[j] == 0.0);
  }
  CHECK(series.forward_events == 0);
  CHECK(series.reverse_events == 0);
  CHECK(result.final_snapshot.size() == 0);
}

TEST_CASE("zero-noise state diffusion reproduces the single-trajectory integrator") {
  RunConfig config = base_config(Method::qsd);
  config.ensemble_size = 1;
  config.t_end = 0.5;
  config.qsd_zero_noise = true;
  config.record_trajectories = true;
  const auto result = nmqt::run_ensemble(config);

  const auto rates = nmqt::solve_rate_function(config.bath, config.system.omega, 0.5, 5e-4);
  nmqt::NoisePath silent;
  silent.dt = config.dt;
  silent.z.assign(501, Complex(0.0, 0.0));
  StateVector psi0 = config.initial_state;
  psi0 /= psi0.norm();  // match the engine's normalization bit for bit
  const auto reference =
      nmqt::integrate_qsd_trajectory(psi0, silent, config.system, rates, config.dt, 500);

  REQUIRE(result.final_snapshot.size() == 1);
  CHECK((result.final_snapshot.states.col(0) - reference.back()).norm() == 0.0);

  // Trajectory records hold the normalized expectations of that solution.
  REQUIRE(result.trajectory_records.size() == 2);
  CHECK(result.trajectory_records[0].rows() == 1);
  CHECK(result.trajectory_records[0].cols() == 501);
  for (std::size_t j : {std::size_t{0}, std::size_t{250}, std::size_t{500}}) {
    const StateVector& psi = reference[j];
    const double sx = nmqt::normalized_expectation(psi, nmqt::sigma_x()).real();
    CHECK(result.trajectory_records[0](0, static_cast<Eigen::Index>(j)) ==
          doctest::Approx(sx).epsilon(1e-12));
    // With M = 1 the ensemble estimate is the single trajectory.
    CHECK(result.series.estimates[0][j] == doctest::Approx(sx).epsilon(1e-12));
  }
}

TEST_CASE("ensemble runs are invariant to the worker count and to reruns") {
  for (Method method : {Method::jump, Method::diffusion}) {
    RunConfig config = base_config(method);
    config.ensemble_size = 16;
    config.t_end = 1.5;  // crosses into the negative-rate window
    config.seed = 404;

    config.workers = 1;
    const auto serial = nmqt::run_ensemble(config);
    config.workers = 3;
    const auto threaded = nmqt::run_ensemble(config);
    config.workers = 16;
    const auto wide = nmqt::run_ensemble(config);

    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(serial.series.estimates[i] == threaded.series.estimates[i]);
      CHECK(serial.series.estimates[i] == wide.series.estimates[i]);
      CHECK(serial.series.standard_errors[i] == threaded.series.standard_errors[i]);
      CHECK(serial.series.raw_means[i] == wide.series.raw_means[i]);
    }
    CHECK(serial.series.trace == threaded.series.trace);
    CHECK(serial.series.trace == wide.series.trace);
    CHECK(serial.series.forward_events == threaded.series.forward_events);
    CHECK(serial.series.reverse_events == wide.series.reverse_events);
    CHECK((serial.final_snapshot.states - threaded.final_snapshot.states).cwiseAbs().maxCoeff() ==
          0.0);

    // Same config, fresh run: bit-identical.
    config.workers = 3;
    const auto again = nmqt::run_ensemble(config);
    CHECK(again.series.estimates[0] == threaded.series.estimates[0]);
  }
}

TEST_CASE("jump engine replays the spec-shaped per-trajectory recursion") {
  // Over a horizon where the decay rate stays non-negative the reverse
  // channel never opens, so the engine's per-step work factorizes into the
  // published single-trajectory step. Rebuild it by hand and demand
  // bit-identical final states.
  RunConfig config = base_config(Method::jump);
  config.ensemble_size = 4;
  config.t_end = 0.05;
  config.seed = 77;
  const auto result = nmqt::run_ensemble(config);

  const std::size_t n = config.steps();
  const auto rates =
      nmqt::solve_rate_function(config.bath, config.system.omega, config.t_end, config.dt / 2.0);
  const auto family =
      nmqt::build_jump_family(config.system.coupling, config.epsilon, config.m_channels);

  const nmqt::OperatorMatrix ldl = config.system.coupling.adjoint() * config.system.coupling;
  const nmqt::OperatorMatrix minus_ih = Complex(0.0, -1.0) * config.system.h;
  std::vector<nmqt::OperatorMatrix> flows(rates.size());
  for (std::size_t k = 0; k < rates.size(); ++k) flows[k] = minus_ih - rates.f[k] * ldl;

  StateVector psi0 = config.initial_state;
  psi0 /= psi0.norm();  // match the engine's normalization bit for bit
  for (std::size_t nu = 0; nu < config.ensemble_size; ++nu) {
    nmqt::RngStream stream(config.seed, nu);
    StateVector psi = psi0;
    for (std::size_t j = 0; j < n; ++j) {
      const double t = static_cast<double>(j) * config.dt;
      const nmqt::OperatorMatrix propagator = nmqt::rk4_propagator_from_nodes(
          flows[2 * j], flows[2 * j + 1], flows[2 * j + 2], config.dt);
      auto step = nmqt::step_trajectory_jump(psi, t, config.dt, family, propagator, rates,
                                             nullptr, stream);
      psi = std::move(step.psi);
    }
    CHECK((result.final_snapshot.states.col(static_cast<Eigen::Index>(nu)) - psi).norm() == 0.0);
  }
}

TEST_CASE("progress callback ticks once per step from the serial region") {
  RunConfig config = base_config(Method::qsd);
  config.ensemble_size = 2;
  config.t_end = 0.02;  // 20 steps
  std::vector<std::pair<std::size_t, std::size_t>> ticks;
  config.progress = [&](std::size_t done, std::size_t total) { ticks.emplace_back(done, total); };
  (void)nmqt::run_ensemble(config);

  REQUIRE(ticks.size() == 20);
  for (std::size_t j = 0; j < ticks.size(); ++j) {
    CHECK(ticks[j].first == j + 1);
    CHECK(ticks[j].second == 20);
  }
}

TEST_CASE("trajectory overflow aborts with the trajectory id and step") {
  // omega_c = omega and Gamma > 2g make the rate equation over-damped: F(t)
  // relaxes monotonically on the real axis to a small fixed point, so the
  // schedule solves cleanly even at the absurd dt/2 = 2.5. The state step,
  // however, is an RK4 with |eigenvalue| * dt ~ 5 and amplifies every
  // component ~25x per step until the squared norm crosses the 1e24 guard.
  RunConfig config = base_config(Method::qsd);
  config.bath = nmqt::BathSpec{0.02, 0.2, 2.0};
  config.ensemble_size = 1;
  config.dt = 5.0;
  config.t_end = 60.0;
  config.qsd_zero_noise = true;

  try {
    (void)nmqt::run_ensemble(config);
    FAIL("expected the run to abort");
  } catch (const nmqt::NumericalError& e) {
    const std::string what = e.what();
    CHECK(what.find("trajectory 0 aborted at step") != std::string::npos);
    CHECK(what.find("state overflowed") != std::string::npos);
  }
}

TEST_CASE("density estimate: degenerate and two-point ensembles") {
  // All columns equal: the estimate is the projector and the error vanishes.
  nmqt::EnsembleSnapshot snap;
  StateVector psi(2);
  psi << Complex(0.6, 0.0), Complex(0.0, 0.8);
  snap.states.resize(2, 3);
  snap.states.col(0) = psi;
  snap.states.col(1) = psi;
  snap.states.col(2) = psi;
  const auto est = nmqt::estimate_density_matrix(snap);
  CHECK((est.rho - psi * psi.adjoint()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(est.standard_error.maxCoeff() < 1e-15);

  // Ground plus excited: the maximally mixed estimate, diagonal error 1/2.
  nmqt::EnsembleSnapshot pair;
  pair.states = Eigen::MatrixXcd::Identity(2, 2);
  const auto mixed = nmqt::estimate_density_matrix(pair);
  CHECK(std::abs(mixed.rho(0, 0) - Complex(0.5, 0.0)) < 1e-15);
  CHECK(std::abs(mixed.rho(1, 1) - Complex(0.5, 0.0)) < 1e-15);
  CHECK(std::abs(mixed.rho(0, 1)) == 0.0);
  CHECK(mixed.standard_error(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(mixed.standard_error(1, 1) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(mixed.standard_error(0, 1) == 0.0);

  // Single sample: no spread to estimate.
  nmqt::EnsembleSnapshot one;
  one.states = psi;
  CHECK(nmqt::estimate_density_matrix(one).standard_error.maxCoeff() == 0.0);

  nmqt::EnsembleSnapshot empty;
  empty.states.resize(2, 0);
  CHECK_THROWS_AS(nmqt::estimate_density_matrix(empty), nmqt::ConfigError);
}

TEST_CASE("observable from a density estimate") {
  nmqt::DensityMatrix mixed = 0.5 * nmqt::DensityMatrix::Identity(2, 2);
  CHECK(nmqt::observable_from_density(mixed, nmqt::sigma_z()) == doctest::Approx(0.0));

  nmqt::DensityMatrix excited = nmqt::DensityMatrix::Zero(2, 2);
  excited(1, 1) = Complex(1.0, 0.0);
  CHECK(nmqt::observable_from_density(excited, nmqt::sigma_z()) == doctest::Approx(1.0));

  // The trace ratio is scale invariant: unnormalized ensemble means are fine.
  CHECK(nmqt::observable_from_density(2.7 * excited, nmqt::sigma_z()) == doctest::Approx(1.0));

  CHECK_THROWS_AS(nmqt::observable_from_density(nmqt::DensityMatrix::Zero(2, 2), nmqt::sigma_z()),
                  nmqt::NumericalError);
  CHECK_THROWS_AS(nmqt::observable_from_density(nmqt::DensityMatrix::Zero(2, 3), nmqt::sigma_z()),
                  nmqt::ConfigError);
  CHECK_THROWS_AS(nmqt::observable_from_density(mixed, nmqt::OperatorMatrix::Zero(3, 3)),
                  nmqt::ConfigError);
  CHECK_THROWS_AS(nmqt::observable_from_density(mixed, nmqt::sigma_minus()), nmqt::ConfigError);
}

TEST_CASE("small stochastic run: grid, traces, and diagnostics are sane") {
  RunConfig config = base_config(Method::jump);
  config.ensemble_size = 32;
  config.t_end = 0.5;
  const auto result = nmqt::run_ensemble(config);
  const auto& series = result.series;

  REQUIRE(series.size() == 501);
  CHECK(series.times[0] == 0.0);
  CHECK(series.times[250] == doctest::Approx(0.25).epsilon(1e-12));

  // The initial row is exact: everyone starts at |+>.
  CHECK(series.estimates[0][0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(series.standard_errors[0][0] < 1e-14);
  CHECK(series.trace[0] == doctest::Approx(1.0).epsilon(1e-14));

  for (std::size_t j = 0; j < series.size(); ++j) {
    // Linear-unraveling traces wander but stay near one at these horizons.
    CHECK(series.trace[j] > 0.5);
    CHECK(series.trace[j] < 2.0);
    CHECK(series.trace_se[j] >= 0.0);
    CHECK(series.flagged_fraction[j] == 0.0);  // no reverse window before t=1.148
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(std::isfinite(series.estimates[i][j]));
      CHECK(series.standard_errors[i][j] >= 0.0);
    }
  }
  CHECK(series.reverse_events == 0);  // rate stays non-negative on [0, 0.5]
  CHECK_FALSE(series.large_probability_warning);
  CHECK_FALSE(series.unreliable);
  CHECK(result.final_snapshot.size() == 32);
}
