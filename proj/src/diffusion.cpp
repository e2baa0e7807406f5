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

#include "nmqt/diffusion.hpp"

#include <cmath>

#include "nmqt/errors.hpp"

namespace nmqt {

Complex sample_complex_increment(double gamma, double dt, RngStream& rng) {
  if (gamma < 0.0) {
    throw ConfigError("complex increment: rate must be non-negative (pass split rates)");
  }
  if (!(dt > 0.0)) {
    throw ConfigError("complex increment: dt must be positive");
  }
  if (gamma == 0.0) return Complex(0.0, 0.0);
  const double amplitude = std::sqrt(gamma * dt);
  const double re = rng.next_gaussian();
  const double im = rng.next_gaussian();
  return Complex(amplitude * re, amplitude * im);
}

namespace {

// Entropy prefactor c = sum_n conj((L psi)_n) * grad_n = <L psi | grad>.
struct EntropyTerm {
  Complex c{0.0, 0.0};
  bool flagged = false;
};

EntropyTerm entropy_prefactor(const StateVector& l_psi, const StateVector& psi,
                              const KdeContext* kde) {
  EntropyTerm term;
  if (kde == nullptr) {
    throw ConfigError("diffusion drift: entropy term open but no ensemble density given");
  }
  const auto grad = kde->log_density_gradient(psi);
  if (grad.far_from_ensemble) {
    term.flagged = true;
    return term;
  }
  term.c = l_psi.dot(grad.gradient);
  return term;
}

}  // namespace

NmqdDrift nmqd_drift(const StateVector& psi, double t, const SystemSpec& system,
                     const RateSchedule& rates, const KdeContext* kde) {
  const DriftGenerator drift{&system, &rates};
  NmqdDrift out;
  out.value = drift.flow(t) * psi;
  const auto r = rates.at(t);
  if (r.gamma_minus > 0.0) {
    const StateVector l_psi = system.coupling * psi;
    const EntropyTerm term = entropy_prefactor(l_psi, psi, kde);
    out.flagged = term.flagged;
    if (!term.flagged) {
      out.value += (2.0 * r.gamma_minus * term.c) * l_psi;
    }
  }
  return out;
}

namespace {

DiffusionStepResult diffusion_step_impl(const StateVector& psi, double t, double dt,
                                        const SystemSpec& system,
                                        const OperatorMatrix& no_event_propagator,
                                        const RateSchedule& rates, const KdeContext* kde,
                                        RngStream& rng) {
  const auto r = rates.at(t);
  DiffusionStepResult result;
  result.psi = no_event_propagator * psi;

  const bool has_noise = r.gamma_plus > 0.0 || r.gamma_minus > 0.0;
  if (!has_noise) return result;

  const StateVector l_psi = system.coupling * psi;
  if (r.gamma_minus > 0.0) {
    const EntropyTerm term = entropy_prefactor(l_psi, psi, kde);
    result.flagged = term.flagged;
    if (!term.flagged) {
      result.psi += (2.0 * r.gamma_minus * term.c * dt) * l_psi;
    }
  }
  const Complex dz_plus = sample_complex_increment(r.gamma_plus, dt, rng);
  const Complex dz_minus = sample_complex_increment(r.gamma_minus, dt, rng);
  result.psi += (dz_plus - dz_minus) * l_psi;
  return result;
}

}  // namespace

DiffusionStepResult step_trajectory_diffusion(const StateVector& psi, double t, double dt,
                                              const SystemSpec& system, const RateSchedule& rates,
                                              const KdeContext* kde, RngStream& rng) {
  const DriftGenerator drift{&system, &rates};
  return diffusion_step_impl(psi, t, dt, system, rk4_propagator(drift, t, dt), rates, kde, rng);
}

DiffusionStepResult step_trajectory_diffusion(const StateVector& psi, double t, double dt,
                                              const SystemSpec& system,
                                              const OperatorMatrix& no_event_propagator,
                                              const RateSchedule& rates, const KdeContext* kde,
                                              RngStream& rng) {
  return diffusion_step_impl(psi, t, dt, system, no_event_propagator, rates, kde, rng);
}

}  // namespace nmqt
