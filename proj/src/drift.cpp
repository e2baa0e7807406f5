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

#include "nmqt/drift.hpp"

#include "nmqt/errors.hpp"

namespace nmqt {

OperatorMatrix DriftGenerator::g_prime(double t) const {
  if (system == nullptr || rates == nullptr) {
    throw ConfigError("drift generator is not bound to a system and rate schedule");
  }
  const auto r = rates->at(t);
  const OperatorMatrix ldl = system->coupling.adjoint() * system->coupling;
  return system->hamiltonian(t) + Complex(r.s, -r.f.real()) * ldl;
}

OperatorMatrix DriftGenerator::flow(double t) const {
  if (system == nullptr || rates == nullptr) {
    throw ConfigError("drift generator is not bound to a system and rate schedule");
  }
  const auto r = rates->at(t);
  const OperatorMatrix ldl = system->coupling.adjoint() * system->coupling;
  return Complex(0.0, -1.0) * system->hamiltonian(t) - r.f * ldl;
}

OperatorMatrix rk4_propagator(const DriftGenerator& drift, double t, double dt) {
  return rk4_propagator_from_nodes(drift.flow(t), drift.flow(t + 0.5 * dt), drift.flow(t + dt),
                                   dt);
}

OperatorMatrix rk4_propagator_from_nodes(const OperatorMatrix& a0, const OperatorMatrix& a_mid,
                                         const OperatorMatrix& a1, double dt) {
  const auto d = a0.rows();
  const OperatorMatrix id = OperatorMatrix::Identity(d, d);
  const OperatorMatrix& k1 = a0;
  const OperatorMatrix k2 = a_mid * (id + 0.5 * dt * k1);
  const OperatorMatrix k3 = a_mid * (id + 0.5 * dt * k2);
  const OperatorMatrix k4 = a1 * (id + dt * k3);
  return id + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace nmqt
