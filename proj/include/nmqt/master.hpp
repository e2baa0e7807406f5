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

namespace nmqt {

// The open system: Hamiltonian H_S (Hermitian) and traceless coupling
// operator L. For the two-level atom H_S = (omega/2)*sigma_z +
// (Omega/2)*sigma_x and L = sigma_-; omega is the level splitting, Omega the
// Rabi drive. The Hamiltonian here is time-independent; hamiltonian(t) keeps
// the time argument so drives can be added without touching call sites.
struct SystemSpec {
  double omega = 2.0;
  double rabi = 0.5;  // Omega
  OperatorMatrix h;   // H_S
  OperatorMatrix coupling;

  const OperatorMatrix& hamiltonian(double /*t*/) const { return h; }
  Eigen::Index dim() const { return h.rows(); }
  void validate() const;
};

// Two-level atom with L = sigma_-.
SystemSpec make_two_level_system(double omega, double rabi);

// Right-hand side of the time-local master equation
//   d rho/dt = -i[H_S(t) + S(t) L'L, rho] + 2 gamma(t) L rho L' - gamma(t){L'L, rho}
// where F(t) = gamma(t) + i S(t) comes from the schedule (gamma may be
// negative here; the split rates are a trajectory-level concern).
DensityMatrix master_rhs(const DensityMatrix& rho, double t, const SystemSpec& system,
                         const RateSchedule& rates);

// Classical RK4 over n uniform steps of size dt starting at t = 0. Returns
// rho at every grid point including t = 0. The schedule must cover the RK4
// midpoints; a schedule on a dt/2 grid makes them exact nodes. Throws
// NumericalError if |tr rho - 1| drifts beyond 1e-6.
std::vector<DensityMatrix> integrate_master(const DensityMatrix& rho0, const SystemSpec& system,
                                            const RateSchedule& rates, double dt, std::size_t n);

// Analytic solution for the undriven (Omega = 0) two-level atom with
// L = sigma_-, using cumulative trapezoid integrals of gamma and S over the
// schedule grid:
//   rho_ee(t) = rho_ee(0) * exp(-2*Int[gamma])
//   rho_ge(t) = rho_ge(0) * exp(-Int[gamma] + i*(omega*t + Int[S]))
// and the ground population absorbs what the excited one loses.
DensityMatrix closed_form_undriven(const DensityMatrix& rho0, const SystemSpec& system,
                                   const RateSchedule& rates, double t);

// Same solution evaluated on the whole uniform grid (t_j = j*dt, j = 0..n)
// with the cumulative integrals built incrementally.
std::vector<DensityMatrix> closed_form_undriven_series(const DensityMatrix& rho0,
                                                       const SystemSpec& system,
                                                       const RateSchedule& rates, double dt,
                                                       std::size_t n);

}  // namespace nmqt
