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

#pragma once

#include <cstddef>
#include <vector>

#include "nmqt/linalg.hpp"

namespace nmqt {

// Exponential bath correlation alpha(tau) = g*(Gamma/2)*exp(-i*omega_c*tau - Gamma*|tau|).
// Gamma is the inverse correlation time, omega_c the bath resonance frequency,
// g the dimensionless coupling strength.
struct BathSpec {
  double g = 0.8;
  double gamma = 1.0;    // Gamma
  double omega_c = 5.5;

  void validate() const;
};

Complex alpha(const BathSpec& spec, double tau);

// Precomputed complex rate F(t) = gamma(t) + i*S(t) on a uniform grid, split
// pointwise into the non-negative pair gamma = gamma_plus - gamma_minus.
// The grid step is half the integrator step of the consuming run so that
// Runge-Kutta midpoints land exactly on grid nodes.
struct RateSchedule {
  double dt = 0.0;                  // grid spacing
  std::vector<double> t;            // grid times, t[0] = 0
  std::vector<Complex> f;           // F(t_j)
  std::vector<double> s;            // Im F
  std::vector<double> gamma_plus;   // max(Re F, 0)
  std::vector<double> gamma_minus;  // max(-Re F, 0)

  std::size_t size() const { return t.size(); }
  double t_end() const { return t.empty() ? 0.0 : t.back(); }

  // Linear interpolation of F between grid nodes (exact at the nodes),
  // with the split applied to the interpolated value.
  struct Rates {
    Complex f;
    double gamma_plus;
    double gamma_minus;
    double s;
  };
  Rates at(double time) const;

  // F exactly at node j (bounds-checked).
  Complex node(std::size_t j) const;
};

// Integrates the scalar Riccati initial-value problem
//   dF/dt = alpha(0) + (i*omega - i*omega_c - Gamma)*F + F^2,   F(0) = 0,
// with classical RK4 on a uniform grid of the given step, and splits the
// resulting decay rate into its non-negative parts. `omega` is the system
// level splitting. Throws NumericalError if |F| exceeds 1e6*Gamma.
RateSchedule solve_rate_function(const BathSpec& spec, double omega, double t_end, double dt);

// Recomputes the gamma_plus/gamma_minus split from f. Idempotent; exposed so
// schedules built by hand (tests, constant-rate fixtures) can be completed.
void split_rates(RateSchedule& schedule);

// Convenience: a schedule with constant F on a uniform grid (test fixture and
// Markov-limit runs).
RateSchedule constant_rate_schedule(Complex f_value, double t_end, double dt);

}  // namespace nmqt
