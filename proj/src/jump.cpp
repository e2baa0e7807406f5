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

#include "nmqt/jump.hpp"

#include <cmath>
#include <string>

#include "nmqt/errors.hpp"

namespace nmqt {

JumpFamily build_jump_family(const OperatorMatrix& coupling, double epsilon, int m) {
  if (coupling.rows() != coupling.cols()) {
    throw ConfigError("jump family: coupling operator must be square");
  }
  if (!(epsilon > 0.0)) {
    throw ConfigError("jump family: epsilon must be > 0");
  }
  if (m < 2) {
    throw ConfigError("jump family: need m >= 2 channel pairs");
  }

  const auto d = coupling.rows();
  const OperatorMatrix id = OperatorMatrix::Identity(d, d);

  JumpFamily family;
  family.epsilon = epsilon;
  family.m = m;
  const int channels = 2 * m;
  family.xi.reserve(channels);
  family.forward_ops.reserve(channels);
  family.inverse_ops.reserve(channels);
  family.det_factor.reserve(channels);

  for (int k = 1; k <= channels; ++k) {
    const double phase = M_PI * static_cast<double>(k - 1) / static_cast<double>(m);
    family.xi.push_back(std::exp(Complex(0.0, phase)));
  }

  for (int k = 0; k < channels; ++k) {
    OperatorMatrix op = id + epsilon * family.xi[k] * coupling;
    const Complex det = determinant(op);
    if (std::abs(det) <= 1e-14) {
      throw NumericalError("jump family: channel " + std::to_string(k + 1) +
                           " operator is singular; choose a smaller epsilon");
    }
    OperatorMatrix inv = inverse(op);
    if ((inv * op - id).cwiseAbs().maxCoeff() > 1e-12) {
      throw NumericalError("jump family: channel " + std::to_string(k + 1) +
                           " inverse residual exceeds 1e-12; operator is too ill-conditioned");
    }
    family.det_factor.push_back(std::abs(det) * std::abs(std::conj(det)));
    family.forward_ops.push_back(std::move(op));
    family.inverse_ops.push_back(std::move(inv));
  }
  return family;
}

JumpProbabilities jump_probabilities(const StateVector& psi, double t, double dt,
                                     const JumpFamily& family, const RateSchedule& rates,
                                     const KdeContext* kde) {
  const int channels = family.channels();
  const auto r = rates.at(t);
  JumpProbabilities probs;
  probs.forward = Eigen::VectorXd::Zero(channels);
  probs.reverse = Eigen::VectorXd::Zero(channels);

  // |xi_k| = 1 by construction but the modulus is kept explicit to match the
  // per-channel rate definition.
  const double scale = dt / (static_cast<double>(family.m) * family.epsilon * family.epsilon);
  for (int k = 0; k < channels; ++k) {
    const double xi_sq = std::norm(family.xi[k]);
    probs.forward[k] = r.gamma_plus * scale / xi_sq;
  }

  if (r.gamma_minus > 0.0) {
    if (kde == nullptr) {
      throw ConfigError("jump probabilities: reverse channel open but no ensemble density given");
    }
    Eigen::MatrixXcd targets(psi.size(), channels);
    for (int k = 0; k < channels; ++k) {
      targets.col(k) = family.inverse_ops[k] * psi;
    }
    const auto ratios = kde->density_ratios(targets, psi);
    if (ratios.far_from_ensemble) {
      probs.flagged = true;  // reverse probabilities stay zero
    } else {
      for (int k = 0; k < channels; ++k) {
        const double xi_sq = std::norm(family.xi[k]);
        probs.reverse[k] =
            r.gamma_minus * scale / xi_sq * ratios.values[k] / family.det_factor[k];
      }
    }
  }

  probs.large_probability = probs.total() >= 0.1;
  return probs;
}

namespace {

JumpStepResult select_and_apply(const StateVector& psi, const JumpProbabilities& probs,
                                const JumpFamily& family,
                                const OperatorMatrix& no_event_propagator, RngStream& rng) {
  JumpStepResult result;
  result.flagged = probs.flagged;
  result.large_probability = probs.large_probability;

  const int channels = family.channels();
  const double u = rng.next_double();
  double cumulative = 0.0;
  for (int k = 0; k < channels; ++k) {
    cumulative += probs.forward[k];
    if (u < cumulative) {
      result.psi = family.forward_ops[k] * psi;
      result.channel = k;
      return result;
    }
  }
  for (int k = 0; k < channels; ++k) {
    cumulative += probs.reverse[k];
    if (u < cumulative) {
      result.psi = family.inverse_ops[k] * psi;
      result.channel = channels + k;
      return result;
    }
  }
  result.psi = no_event_propagator * psi;
  return result;
}

}  // namespace

JumpStepResult step_trajectory_jump(const StateVector& psi, double t, double dt,
                                    const JumpFamily& family, const DriftGenerator& drift,
                                    const RateSchedule& rates, const KdeContext* kde,
                                    RngStream& rng) {
  const JumpProbabilities probs = jump_probabilities(psi, t, dt, family, rates, kde);
  return select_and_apply(psi, probs, family, rk4_propagator(drift, t, dt), rng);
}

JumpStepResult step_trajectory_jump(const StateVector& psi, double t, double dt,
                                    const JumpFamily& family,
                                    const OperatorMatrix& no_event_propagator,
                                    const RateSchedule& rates, const KdeContext* kde,
                                    RngStream& rng) {
  const JumpProbabilities probs = jump_probabilities(psi, t, dt, family, rates, kde);
  return select_and_apply(psi, probs, family, no_event_propagator, rng);
}

}  // namespace nmqt
