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

#include <vector>

#include "nmqt/bath.hpp"
#include "nmqt/linalg.hpp"
#include "nmqt/master.hpp"
#include "nmqt/rng.hpp"

namespace nmqt {

// A colored complex noise path sampled at the integration grid nodes. The
// stored values are z_j; the state equation consumes their conjugates. The
// process is the complex Ornstein-Uhlenbeck process whose stationary
// autocovariance E[z_{t+tau} z_t^*] equals the bath correlation alpha(tau)
// and whose pseudo-covariance E[z z] vanishes.
struct NoisePath {
  double dt = 0.0;
  std::vector<Complex> z;
};

// Exact one-step recursion constants (no discretization bias in the
// autocovariance):
//   z_{j+1} = e^{-(Gamma + i omega_c) dt} z_j + xi_j,
//   E[|xi_j|^2] = (g Gamma / 2)(1 - e^{-2 Gamma dt}),
// started from the stationary distribution E[|z_0|^2] = g Gamma / 2.
// The sds are per real component (draw order: real part, then imaginary).
// Shared by sample_ou_path and the ensemble engine's in-place noise advance
// so both produce the identical sequence from the same stream.
struct OuRecursion {
  Complex decay;         // e^{-(Gamma + i omega_c) dt}
  double stationary_sd;  // per-component sd of z_0
  double injected_sd;    // per-component sd of xi_j

  Complex initial(RngStream& rng) const { return stationary_sd * rng.next_complex_gaussian(); }
  Complex advance(Complex z, RngStream& rng) const {
    return decay * z + injected_sd * rng.next_complex_gaussian();
  }
};

OuRecursion ou_recursion(const BathSpec& spec, double dt);

NoisePath sample_ou_path(const BathSpec& spec, std::size_t n_steps, double dt, RngStream& rng);

// Right-hand side of the state-diffusion equation under the short-memory
// closure: (-i H_S(t) + z^* L - F(t) L'L) psi.
StateVector qsd_rhs(const StateVector& psi, double t, Complex z_star, const SystemSpec& system,
                    const RateSchedule& rates);

// One RK4 step from t to t+dt with the noise linearly interpolated at the
// substep midpoint (the colored noise has finite correlation time, so
// ordinary calculus applies). z_now and z_next are the path values at the
// step endpoints.
StateVector step_trajectory_qsd(const StateVector& psi, double t, double dt, Complex z_now,
                                Complex z_next, const SystemSpec& system,
                                const RateSchedule& rates);

// Full-trajectory integration over n uniform steps; returns psi at every
// grid node. Throws NumericalError if the squared norm exceeds 1e24
// (norm 1e12) — the trajectory has overflowed.
std::vector<StateVector> integrate_qsd_trajectory(const StateVector& psi0, const NoisePath& noise,
                                                  const SystemSpec& system,
                                                  const RateSchedule& rates, double dt,
                                                  std::size_t n);

}  // namespace nmqt
