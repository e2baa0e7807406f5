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

#include "nmqt/master.hpp"

#include <cmath>
#include <string>

#include "nmqt/errors.hpp"

namespace nmqt {

void SystemSpec::validate() const {
  if (h.rows() != h.cols() || coupling.rows() != coupling.cols() || h.rows() != coupling.rows()) {
    throw ConfigError("system: Hamiltonian and coupling operator dimensions disagree");
  }
  if (!is_hermitian(h, 1e-12)) {
    throw ConfigError("system: Hamiltonian is not Hermitian");
  }
  if (std::abs(coupling.trace()) > 1e-12) {
    throw ConfigError("system: coupling operator must be traceless");
  }
}

SystemSpec make_two_level_system(double omega, double rabi) {
  SystemSpec spec;
  spec.omega = omega;
  spec.rabi = rabi;
  spec.h = 0.5 * omega * sigma_z() + 0.5 * rabi * sigma_x();
  spec.coupling = sigma_minus();
  spec.validate();
  return spec;
}

DensityMatrix master_rhs(const DensityMatrix& rho, double t, const SystemSpec& system,
                         const RateSchedule& rates) {
  const auto r = rates.at(t);
  const double gamma_t = r.f.real();
  const OperatorMatrix& l_op = system.coupling;
  const OperatorMatrix ldl = l_op.adjoint() * l_op;
  const OperatorMatrix h_eff = system.hamiltonian(t) + r.s * ldl;
  const Complex i_unit(0.0, 1.0);
  DensityMatrix out = -i_unit * (h_eff * rho - rho * h_eff);
  out += 2.0 * gamma_t * (l_op * rho * l_op.adjoint());
  out -= gamma_t * (ldl * rho + rho * ldl);
  return out;
}

std::vector<DensityMatrix> integrate_master(const DensityMatrix& rho0, const SystemSpec& system,
                                            const RateSchedule& rates, double dt, std::size_t n) {
  system.validate();
  if (!is_hermitian(rho0, 1e-12)) {
    throw ConfigError("master integrator: initial state is not Hermitian");
  }
  if (std::abs(rho0.trace().real() - 1.0) > 1e-9 || std::abs(rho0.trace().imag()) > 1e-12) {
    throw ConfigError("master integrator: initial state must have unit trace");
  }

  std::vector<DensityMatrix> out;
  out.reserve(n + 1);
  out.push_back(rho0);
  DensityMatrix rho = rho0;
  for (std::size_t j = 0; j < n; ++j) {
    const double t = static_cast<double>(j) * dt;
    const DensityMatrix k1 = master_rhs(rho, t, system, rates);
    const DensityMatrix k2 = master_rhs(rho + 0.5 * dt * k1, t + 0.5 * dt, system, rates);
    const DensityMatrix k3 = master_rhs(rho + 0.5 * dt * k2, t + 0.5 * dt, system, rates);
    const DensityMatrix k4 = master_rhs(rho + dt * k3, t + dt, system, rates);
    rho += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (std::abs(rho.trace().real() - 1.0) > 1e-6) {
      throw NumericalError("master integrator: trace drift beyond 1e-6 at t = " +
                           std::to_string(t + dt));
    }
    out.push_back(rho);
  }
  return out;
}

namespace {

void require_undriven_tla(const SystemSpec& system) {
  if (system.dim() != 2) {
    throw ConfigError("closed-form solution is only defined for the two-level atom");
  }
  if (system.rabi != 0.0 || std::abs(system.h(0, 1)) > 1e-14) {
    throw ConfigError("closed-form solution requires zero drive (Omega = 0)");
  }
  if ((system.coupling - sigma_minus()).cwiseAbs().maxCoeff() > 1e-14) {
    throw ConfigError("closed-form solution requires L = sigma_-");
  }
}

DensityMatrix assemble_undriven(const DensityMatrix& rho0, double omega, double t,
                                double int_gamma, double int_s) {
  const Complex i_unit(0.0, 1.0);
  DensityMatrix rho(2, 2);
  const Complex ee = rho0(1, 1) * std::exp(Complex(-2.0 * int_gamma, 0.0));
  const Complex ge = rho0(0, 1) * std::exp(-int_gamma + i_unit * (omega * t + int_s));
  rho(1, 1) = ee;
  rho(0, 0) = rho0.trace() - ee;
  rho(0, 1) = ge;
  rho(1, 0) = std::conj(ge);
  return rho;
}

}  // namespace

DensityMatrix closed_form_undriven(const DensityMatrix& rho0, const SystemSpec& system,
                                   const RateSchedule& rates, double t) {
  require_undriven_tla(system);
  if (t < 0.0 || t > rates.t_end() + 1e-12) {
    throw ConfigError("closed-form solution: time outside rate schedule");
  }
  // trapezoid cumulative integrals of gamma and S up to t over the grid
  const double h = rates.dt;
  const auto full_steps = static_cast<std::size_t>(t / h);
  double int_gamma = 0.0;
  double int_s = 0.0;
  for (std::size_t j = 0; j + 1 <= full_steps && j + 1 < rates.size(); ++j) {
    int_gamma += 0.5 * h * (rates.f[j].real() + rates.f[j + 1].real());
    int_s += 0.5 * h * (rates.s[j] + rates.s[j + 1]);
  }
  const double rem = t - static_cast<double>(full_steps) * h;
  if (rem > 1e-12 && full_steps + 1 < rates.size()) {
    // partial trapezoid against the linearly interpolated endpoint
    const auto r = rates.at(t);
    int_gamma += 0.5 * rem * (rates.f[full_steps].real() + r.f.real());
    int_s += 0.5 * rem * (rates.s[full_steps] + r.s);
  }
  return assemble_undriven(rho0, system.omega, t, int_gamma, int_s);
}

std::vector<DensityMatrix> closed_form_undriven_series(const DensityMatrix& rho0,
                                                       const SystemSpec& system,
                                                       const RateSchedule& rates, double dt,
                                                       std::size_t n) {
  require_undriven_tla(system);
  if (n * dt > rates.t_end() + 1e-9) {
    throw ConfigError("closed-form series: grid extends beyond rate schedule");
  }
  std::vector<DensityMatrix> out;
  out.reserve(n + 1);
  out.push_back(assemble_undriven(rho0, system.omega, 0.0, 0.0, 0.0));

  // incremental trapezoid over the schedule's finer grid
  const double h = rates.dt;
  const auto stride = static_cast<std::size_t>(std::llround(dt / h));
  if (stride == 0 || std::abs(static_cast<double>(stride) * h - dt) > 1e-9 * dt) {
    throw ConfigError("closed-form series: schedule grid must subdivide dt");
  }
  double int_gamma = 0.0;
  double int_s = 0.0;
  std::size_t node = 0;
  for (std::size_t j = 1; j <= n; ++j) {
    for (std::size_t k = 0; k < stride; ++k, ++node) {
      int_gamma += 0.5 * h * (rates.f[node].real() + rates.f[node + 1].real());
      int_s += 0.5 * h * (rates.s[node] + rates.s[node + 1]);
    }
    out.push_back(
        assemble_undriven(rho0, system.omega, static_cast<double>(j) * dt, int_gamma, int_s));
  }
  return out;
}

}  // namespace nmqt
