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

#include <Eigen/Dense>

#include "nmqt/linalg.hpp"

namespace nmqt {

// The M trajectory states frozen at one time step; column nu is psi^nu.
// Treated as immutable once built: every KDE query within a step reads the
// same snapshot, which keeps trajectories exchangeable and the step order
// independent.
struct EnsembleSnapshot {
  Eigen::MatrixXcd states;  // D x M

  Eigen::Index dim() const { return states.rows(); }
  Eigen::Index size() const { return states.cols(); }
};

// Rule-of-thumb bandwidth M^(-1/(d+5)) with d = 2*D, the real dimension of
// the complex coordinate space. Requires M >= 2.
double kde_bandwidth(std::size_t m_count, Eigen::Index dim);

// Gaussian-kernel density estimation over raw (unnormalized, phase-inclusive)
// Hilbert-space coordinates. Densities are normalized with (pi*sigma^2)^D so
// they integrate to one; the normalization cancels in the ratios and
// gradients that the dynamics actually consume.
//
// Queries far outside the ensemble's support (every kernel exponent below the
// double-precision floor) report far_from_ensemble instead of garbage; the
// dynamics then suppress the reverse jump / entropy term and flag the
// trajectory.
class KdeContext {
 public:
  KdeContext(EnsembleSnapshot snapshot, double sigma);

  const EnsembleSnapshot& snapshot() const { return snapshot_; }
  double sigma() const { return sigma_; }

  // (1/(M*(pi*sigma^2)^D)) * sum_nu exp(-|psi - psi_nu|^2 / sigma^2).
  // Underflows quietly to 0.
  double density(const StateVector& psi) const;

  struct Ratio {
    double value = 0.0;
    bool far_from_ensemble = false;
  };

  // P[target]/P[source], evaluated with a shared max-exponent shift so the
  // ratio stays finite whenever the source has any non-underflowed kernel
  // term. A source beyond the support returns {0, true}.
  Ratio density_ratio(const StateVector& target, const StateVector& source) const;

  // Several targets against one source, sharing one exponent shift and one
  // source evaluation. Column k of `targets` yields values[k]. This is the
  // path the jump dynamics use (2m channels per trajectory per step).
  struct RatioBatch {
    Eigen::VectorXd values;
    bool far_from_ensemble = false;
  };
  RatioBatch density_ratios(const Eigen::MatrixXcd& targets, const StateVector& source) const;

  struct LogGradient {
    Eigen::VectorXcd gradient;
    bool far_from_ensemble = false;
  };

  // Conjugate-coordinate log-derivative in mean-shift form,
  //   d ln P / d psi_n^* = -(psi_n - <<psi_n>>) / sigma^2,
  // where <<.>> averages the samples under softmax weights
  // exp(-|psi - psi_nu|^2/sigma^2) normalized over nu.
  LogGradient log_density_gradient(const StateVector& psi) const;

 private:
  // Kernel exponents -|psi - psi_nu|^2 / sigma^2 against all samples.
  Eigen::ArrayXd exponents(const StateVector& psi) const;

  EnsembleSnapshot snapshot_;
  double sigma_;
  double inv_sigma2_;
  double log_norm_;               // log(M * (pi*sigma^2)^D)
  Eigen::ArrayXd sample_sqnorm_;  // |psi_nu|^2 per column
};

}  // namespace nmqt
