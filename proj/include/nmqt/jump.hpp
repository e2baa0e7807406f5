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
#include "nmqt/drift.hpp"
#include "nmqt/kde.hpp"
#include "nmqt/linalg.hpp"
#include "nmqt/rng.hpp"

namespace nmqt {

// The 2m scaled jump operators L_k = 1 + eps*xi_k*L with xi_k = e^{i pi (k-1)/m}
// (k = 1..2m), their exact inverses, and the determinant weights entering the
// reverse-jump probabilities.
struct JumpFamily {
  double epsilon = 0.5;
  int m = 2;
  std::vector<Complex> xi;                  // 2m unit-modulus phases, paired xi_k = -xi_{k+m}
  std::vector<OperatorMatrix> forward_ops;  // L_k
  std::vector<OperatorMatrix> inverse_ops;  // L_k^{-1}
  std::vector<double> det_factor;           // |det L_k| * |det L_k^dagger|

  int channels() const { return 2 * m; }
};

// Builds the family and verifies each channel operator is invertible
// (inverse residual within 1e-12). ||eps*L|| < 1 is the sufficient condition
// that guarantees invertibility via the Neumann series, but it is not
// necessary — e.g. eps = 1 with nilpotent L = sigma_- still gives det L_k = 1
// exactly — so invertibility is checked directly per channel instead of
// rejecting on the norm bound.
JumpFamily build_jump_family(const OperatorMatrix& coupling, double epsilon, int m);

// Per-channel event probabilities for one step of length dt:
//   forward[k] = gamma_plus(t) dt / (m eps^2 |xi_k|^2)
//   reverse[k] = gamma_minus(t) dt / (m eps^2 |xi_k|^2)
//                * P[L_k^{-1} psi] / P[psi] / det_factor[k]
// The density ratio uses the frozen start-of-step ensemble snapshot. `kde`
// may be null only while gamma_minus(t) = 0 (no reverse channel is open).
// A far-from-ensemble source zeroes the reverse probabilities and flags the
// trajectory. `large_probability` reports a total above 0.1 — the step size
// is too coarse for the one-event-per-step discipline and the caller should
// warn.
struct JumpProbabilities {
  Eigen::VectorXd forward;
  Eigen::VectorXd reverse;
  bool flagged = false;
  bool large_probability = false;

  double total() const { return forward.sum() + reverse.sum(); }
};

JumpProbabilities jump_probabilities(const StateVector& psi, double t, double dt,
                                     const JumpFamily& family, const RateSchedule& rates,
                                     const KdeContext* kde);

// One step of the piecewise-deterministic process: a single uniform variate
// partitions [0,1) among the 2m forward channels, 2m reverse channels, and
// no-event; at most one event fires per step. Forward k applies L_k, reverse
// k applies L_k^{-1}, no event advances by the RK4 propagator of the
// deterministic flow.
struct JumpStepResult {
  StateVector psi;
  int channel = -1;      // -1: no event; 0..2m-1: forward; 2m..4m-1: reverse
  bool flagged = false;
  bool large_probability = false;
};

JumpStepResult step_trajectory_jump(const StateVector& psi, double t, double dt,
                                    const JumpFamily& family, const DriftGenerator& drift,
                                    const RateSchedule& rates, const KdeContext* kde,
                                    RngStream& rng);

// Engine fast path: same step with the no-event propagator precomputed once
// per step and shared by every trajectory.
JumpStepResult step_trajectory_jump(const StateVector& psi, double t, double dt,
                                    const JumpFamily& family,
                                    const OperatorMatrix& no_event_propagator,
                                    const RateSchedule& rates, const KdeContext* kde,
                                    RngStream& rng);

}  // namespace nmqt
