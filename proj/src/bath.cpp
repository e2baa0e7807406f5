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

#include "nmqt/bath.hpp"

#include <cmath>
#include <string>

#include "nmqt/errors.hpp"

namespace nmqt {

void BathSpec::validate() const {
  if (!(g > 0.0)) throw ConfigError("bath: coupling strength g must be > 0");
  if (!(gamma > 0.0)) throw ConfigError("bath: inverse correlation time Gamma must be > 0");
}

Complex alpha(const BathSpec& spec, double tau) {
  const double amp = spec.g * spec.gamma / 2.0;
  return amp * std::exp(Complex(-spec.gamma * std::abs(tau), -spec.omega_c * tau));
}

RateSchedule::Rates RateSchedule::at(double time) const {
  if (t.empty()) throw ConfigError("rate schedule is empty");
  if (time < t.front() - 1e-12 || time > t.back() + 1e-12) {
    throw ConfigError("time " + std::to_string(time) + " outside rate schedule [0, " +
                      std::to_string(t.back()) + "]");
  }
  Complex fv;
  if (time <= t.front()) {
    fv = f.front();
  } else if (time >= t.back()) {
    fv = f.back();
  } else {
    const double x = time / dt;
    auto j = static_cast<std::size_t>(x);
    if (j >= f.size() - 1) j = f.size() - 2;
    const double frac = x - static_cast<double>(j);
    // exact node value when frac is 0, plain linear blend otherwise
    fv = (frac == 0.0) ? f[j] : f[j] * (1.0 - frac) + f[j + 1] * frac;
  }
  const double g_val = fv.real();
  return Rates{fv, g_val > 0.0 ? g_val : 0.0, g_val < 0.0 ? -g_val : 0.0, fv.imag()};
}

Complex RateSchedule::node(std::size_t j) const {
  if (j >= f.size()) throw ConfigError("rate schedule node index out of range");
  return f[j];
}

RateSchedule solve_rate_function(const BathSpec& spec, double omega, double t_end, double dt) {
  spec.validate();
  if (!(dt > 0.0) || !(t_end > 0.0)) {
    throw ConfigError("rate solver: t_end and dt must be positive");
  }
  const auto n = static_cast<std::size_t>(std::llround(t_end / dt));
  if (n == 0 || std::abs(n * dt - t_end) > 1e-9 * std::max(1.0, t_end)) {
    throw ConfigError("rate solver: dt must divide t_end");
  }

  const Complex a0 = alpha(spec, 0.0);                          // g*Gamma/2
  const Complex b(-spec.gamma, omega - spec.omega_c);           // i*omega - i*omega_c - Gamma
  const auto rhs = [&](Complex fv) { return a0 + b * fv + fv * fv; };
  const double blow_up = 1e6 * spec.gamma;

  RateSchedule sched;
  sched.dt = dt;
  sched.t.resize(n + 1);
  sched.f.resize(n + 1);
  Complex fv = 0.0;
  sched.t[0] = 0.0;
  sched.f[0] = fv;
  for (std::size_t j = 0; j < n; ++j) {
    const Complex k1 = rhs(fv);
    const Complex k2 = rhs(fv + 0.5 * dt * k1);
    const Complex k3 = rhs(fv + 0.5 * dt * k2);
    const Complex k4 = rhs(fv + dt * k3);
    fv += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!std::isfinite(fv.real()) || !std::isfinite(fv.imag()) || std::abs(fv) > blow_up) {
      throw NumericalError("rate solver diverged at t = " + std::to_string((j + 1) * dt));
    }
    sched.t[j + 1] = static_cast<double>(j + 1) * dt;
    sched.f[j + 1] = fv;
  }
  split_rates(sched);
  return sched;
}

void split_rates(RateSchedule& schedule) {
  const std::size_t n = schedule.f.size();
  schedule.s.resize(n);
  schedule.gamma_plus.resize(n);
  schedule.gamma_minus.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double g_val = schedule.f[j].real();
    schedule.s[j] = schedule.f[j].imag();
    schedule.gamma_plus[j] = g_val > 0.0 ? g_val : 0.0;
    schedule.gamma_minus[j] = g_val < 0.0 ? -g_val : 0.0;
  }
}

RateSchedule constant_rate_schedule(Complex f_value, double t_end, double dt) {
  if (!(dt > 0.0) || !(t_end > 0.0)) {
    throw ConfigError("constant rate schedule: t_end and dt must be positive");
  }
  const auto n = static_cast<std::size_t>(std::llround(t_end / dt));
  RateSchedule sched;
  sched.dt = dt;
  sched.t.resize(n + 1);
  sched.f.assign(n + 1, f_value);
  for (std::size_t j = 0; j <= n; ++j) sched.t[j] = static_cast<double>(j) * dt;
  split_rates(sched);
  return sched;
}

}  // namespace nmqt
