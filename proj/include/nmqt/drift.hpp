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

#include "nmqt/bath.hpp"
#include "nmqt/master.hpp"

namespace nmqt {

// The deterministic generator shared by the jump and diffusion processes
// (and, minus the noise coupling, by the state-diffusion equation):
//   G'(t) = H_S(t) + S(t) L'L - i gamma(t) L'L = H_S(t) - i F(t) L'L.
// The global phase term of the transformed process is dropped; it cancels in
// every projector-level quantity.
struct DriftGenerator {
  const SystemSpec* system = nullptr;
  const RateSchedule* rates = nullptr;

  OperatorMatrix g_prime(double t) const;

  // A(t) = -i G'(t) = -i H_S(t) - F(t) L'L, the generator of d psi/dt = A psi.
  OperatorMatrix flow(double t) const;
};

// One-step RK4 propagator for the linear flow d psi/dt = A(t) psi:
//   U = 1 + dt/6 (K1 + 2 K2 + 2 K3 + K4),
//   K1 = A(t), K2 = A(t+dt/2)(1 + dt/2 K1), K3 = A(t+dt/2)(1 + dt/2 K2),
//   K4 = A(t+dt)(1 + dt K3).
// Equivalent to applying the classical RK4 step to each basis vector; all
// trajectories in a step share one propagator.
OperatorMatrix rk4_propagator(const DriftGenerator& drift, double t, double dt);

// Same propagator assembled from explicitly supplied flow evaluations
// A(t), A(t+dt/2), A(t+dt); the engine precomputes these on the half-step
// rate grid.
OperatorMatrix rk4_propagator_from_nodes(const OperatorMatrix& a0, const OperatorMatrix& a_mid,
                                         const OperatorMatrix& a1, double dt);

}  // namespace nmqt
