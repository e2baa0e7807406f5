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

#include "nmqt/qsd.hpp"

#include <cmath>
#include <string>

#include "nmqt/errors.hpp"

namespace nmqt {

OuRecursion ou_recursion(const BathSpec& spec, double dt) {
  spec.validate();
  if (!(dt > 0.0)) throw ConfigError("noise path: dt must be positive");
  const double stationary_var = spec.g * spec.gamma / 2.0;  // E[|z|^2] = alpha(0)
  const double injected_var = stationary_var * (1.0 - std::exp(-2.0 * spec.gamma * dt));
  return OuRecursion{std::exp(Complex(-spec.gamma * dt, -spec.omega_c * dt)),
                     std::sqrt(stationary_var / 2.0), std::sqrt(injected_var / 2.0)};
}

NoisePath sample_ou_path(const BathSpec& spec, std::size_t n_steps, double dt, RngStream& rng) {
  const OuRecursion rec = ou_recursion(spec, dt);

  NoisePath path;
  path.dt = dt;
  path.z.resize(n_steps + 1);
  Complex z = rec.initial(rng);
  path.z[0] = z;
  for (std::size_t j = 0; j < n_steps; ++j) {
    z = rec.advance(z, rng);
    path.z[j + 1] = z;
  }
  return path;
}

StateVector qsd_rhs(const StateVector& psi, double t, Complex z_star, const SystemSpec& system,
                    const RateSchedule& rates) {
  const auto r = rates.at(t);
  const OperatorMatrix& l_op = system.coupling;
  const Complex i_unit(0.0, 1.0);
  return -i_unit * (system.hamiltonian(t) * psi) + z_star * (l_op * psi) -
         r.f * (l_op.adjoint() * (l_op * psi));
}

StateVector step_trajectory_qsd(const StateVector& psi, double t, double dt, Complex z_now,
                                Complex z_next, const SystemSpec& system,
                                const RateSchedule& rates) {
  const Complex zs0 = std::conj(z_now);
  const Complex zs1 = std::conj(z_next);
  const Complex zs_mid = 0.5 * (zs0 + zs1);
  const StateVector k1 = qsd_rhs(psi, t, zs0, system, rates);
  const StateVector k2 = qsd_rhs(psi + 0.5 * dt * k1, t + 0.5 * dt, zs_mid, system, rates);
  const StateVector k3 = qsd_rhs(psi + 0.5 * dt * k2, t + 0.5 * dt, zs_mid, system, rates);
  const StateVector k4 = qsd_rhs(psi + dt * k3, t + dt, zs1, system, rates);
  return psi + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

std::vector<StateVector> integrate_qsd_trajectory(const StateVector& psi0, const NoisePath& noise,
                                                  const SystemSpec& system,
                                                  const RateSchedule& rates, double dt,
                                                  std::size_t n) {
  if (noise.z.size() < n + 1) {
    throw ConfigError("qsd trajectory: noise path shorter than the integration grid");
  }
  if (std::abs(noise.dt - dt) > 1e-12 * std::max(1.0, dt)) {
    throw ConfigError("qsd trajectory: noise grid step does not match the integration step");
  }
  std::vector<StateVector> out;
  out.reserve(n + 1);
  out.push_back(psi0);
  StateVector psi = psi0;
  for (std::size_t j = 0; j < n; ++j) {
    const double t = static_cast<double>(j) * dt;
    psi = step_trajectory_qsd(psi, t, dt, noise.z[j], noise.z[j + 1], system, rates);
    if (!psi.allFinite() || psi.squaredNorm() > 1e24) {
      throw NumericalError("qsd trajectory overflowed at t = " + std::to_string(t + dt));
    }
    out.push_back(psi);
  }
  return out;
}

}  // namespace nmqt
