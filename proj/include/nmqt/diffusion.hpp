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
#include "nmqt/drift.hpp"
#include "nmqt/kde.hpp"
#include "nmqt/linalg.hpp"
#include "nmqt/rng.hpp"

namespace nmqt {

// One complex noise increment with E[dZ] = 0, E[dZ dZ] = 0 and
// E[dZ dZ*] = 2*gamma*dt: sqrt(gamma*dt)*(u + i*v) with independent standard
// normal u, v. gamma = 0 returns exactly 0 without consuming any draws;
// callers must pass the split (non-negative) rates.
Complex sample_complex_increment(double gamma, double dt, RngStream& rng);

// Drift of the diffusion process:
//   -i G'(t) psi + 2*gamma_minus(t) * (sum_n <psi|L'|n> grad_n) * L psi,
// where grad is the conjugate-coordinate log-density gradient of the frozen
// ensemble snapshot. `kde` may be null only while gamma_minus(t) = 0. A
// far-from-ensemble query zeroes the entropy term and flags the trajectory.
struct NmqdDrift {
  StateVector value;
  bool flagged = false;
};

NmqdDrift nmqd_drift(const StateVector& psi, double t, const SystemSpec& system,
                     const RateSchedule& rates, const KdeContext* kde);

// One Euler-Maruyama step with Ito (left-point) noise and entropy terms. The
// deterministic -iG' part advances through the shared one-step RK4
// propagator, so with gamma_plus = gamma_minus = 0 the step is identical to
// the jump process's no-event drift:
//   psi' = U(t) psi + 2*gamma_minus(t)*c*(L psi)*dt + (dZ_plus - dZ_minus)*(L psi).
// dZ_plus is sampled before dZ_minus at rates gamma_plus(t), gamma_minus(t).
struct DiffusionStepResult {
  StateVector psi;
  bool flagged = false;
};

DiffusionStepResult step_trajectory_diffusion(const StateVector& psi, double t, double dt,
                                              const SystemSpec& system, const RateSchedule& rates,
                                              const KdeContext* kde, RngStream& rng);

// Engine fast path with the shared per-step propagator.
DiffusionStepResult step_trajectory_diffusion(const StateVector& psi, double t, double dt,
                                              const SystemSpec& system,
                                              const OperatorMatrix& no_event_propagator,
                                              const RateSchedule& rates, const KdeContext* kde,
                                              RngStream& rng);

}  // namespace nmqt
