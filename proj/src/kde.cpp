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

#include "nmqt/kde.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "nmqt/errors.hpp"

namespace nmqt {

namespace {
// Exponent floor below which exp() underflows to zero in double precision;
// a query whose best kernel term sits under this is outside the support.
constexpr double kFarExponent = -700.0;
}  // namespace

double kde_bandwidth(std::size_t m_count, Eigen::Index dim) {
  if (m_count < 2) {
    throw ConfigError("kde bandwidth: need at least 2 samples, got " + std::to_string(m_count));
  }
  if (dim < 1) {
    throw ConfigError("kde bandwidth: dimension must be positive");
  }
  const double d_real = 2.0 * static_cast<double>(dim);
  return std::pow(static_cast<double>(m_count), -1.0 / (d_real + 5.0));
}

KdeContext::KdeContext(EnsembleSnapshot snapshot, double sigma)
    : snapshot_(std::move(snapshot)), sigma_(sigma) {
  if (snapshot_.size() < 1) throw ConfigError("kde: snapshot is empty");
  if (!(sigma > 0.0)) throw ConfigError("kde: bandwidth must be positive");
  inv_sigma2_ = 1.0 / (sigma_ * sigma_);
  const double d = static_cast<double>(snapshot_.dim());
  log_norm_ = std::log(static_cast<double>(snapshot_.size())) +
              d * std::log(M_PI * sigma_ * sigma_);
  sample_sqnorm_ = snapshot_.states.colwise().squaredNorm().array();
}

Eigen::ArrayXd KdeContext::exponents(const StateVector& psi) const {
  if (psi.size() != snapshot_.dim()) {
    throw ConfigError("kde: query dimension does not match snapshot");
  }
  // |psi - s|^2 = |psi|^2 + |s|^2 - 2 Re<s, psi>, one matrix-vector product
  // for all samples at once.
  const double query_sqnorm = psi.squaredNorm();
  const Eigen::VectorXcd overlap = snapshot_.states.adjoint() * psi;
  return (2.0 * overlap.real().array() - query_sqnorm - sample_sqnorm_) * inv_sigma2_;
}

double KdeContext::density(const StateVector& psi) const {
  const Eigen::ArrayXd e = exponents(psi);
  const double shift = e.maxCoeff();
  if (shift < kFarExponent) return 0.0;
  const double sum = (e - shift).exp().sum();
  return std::exp(shift + std::log(sum) - log_norm_);
}

KdeContext::Ratio KdeContext::density_ratio(const StateVector& target,
                                            const StateVector& source) const {
  RatioBatch batch = density_ratios(target, source);
  return Ratio{batch.values[0], batch.far_from_ensemble};
}

KdeContext::RatioBatch KdeContext::density_ratios(const Eigen::MatrixXcd& targets,
                                                  const StateVector& source) const {
  const Eigen::Index k_count = targets.cols();
  RatioBatch out;
  out.values = Eigen::VectorXd::Zero(k_count);

  const Eigen::ArrayXd source_exp = exponents(source);
  const double source_max = source_exp.maxCoeff();
  if (source_max < kFarExponent) {
    // Source sits outside the estimated support; no ratio is meaningful.
    out.far_from_ensemble = true;
    return out;
  }

  std::vector<Eigen::ArrayXd> target_exps;
  target_exps.reserve(static_cast<std::size_t>(k_count));
  double shift = source_max;
  for (Eigen::Index k = 0; k < k_count; ++k) {
    target_exps.push_back(exponents(targets.col(k)));
    shift = std::max(shift, target_exps.back().maxCoeff());
  }

  const double source_sum = (source_exp - shift).exp().sum();
  if (source_sum <= 0.0) {
    // Possible when a target dominates the shift so strongly that every
    // shifted source term underflows; the source is effectively invisible.
    out.far_from_ensemble = true;
    return out;
  }
  for (Eigen::Index k = 0; k < k_count; ++k) {
    out.values[k] = (target_exps[static_cast<std::size_t>(k)] - shift).exp().sum() / source_sum;
  }
  return out;
}

KdeContext::LogGradient KdeContext::log_density_gradient(const StateVector& psi) const {
  LogGradient out;
  const Eigen::ArrayXd e = exponents(psi);
  const double shift = e.maxCoeff();
  if (shift < kFarExponent) {
    out.gradient = Eigen::VectorXcd::Zero(snapshot_.dim());
    out.far_from_ensemble = true;
    return out;
  }
  Eigen::ArrayXd w = (e - shift).exp();
  w /= w.sum();
  const Eigen::VectorXcd weighted_mean = snapshot_.states * w.matrix().cast<Complex>();
  out.gradient = -(psi - weighted_mean) * inv_sigma2_;
  return out;
}

}  // namespace nmqt
