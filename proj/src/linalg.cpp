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

#include "nmqt/linalg.hpp"

#include <Eigen/LU>

#include "nmqt/errors.hpp"

namespace nmqt {

Complex expectation(const StateVector& psi, const OperatorMatrix& op) {
  if (op.rows() != op.cols() || op.rows() != psi.size()) {
    throw ConfigError("expectation: operator is " + std::to_string(op.rows()) + "x" +
                      std::to_string(op.cols()) + " but state has dimension " +
                      std::to_string(psi.size()));
  }
  return psi.dot(op * psi);  // Eigen's dot conjugates the left argument
}

Complex normalized_expectation(const StateVector& psi, const OperatorMatrix& op) {
  const double norm2 = psi.squaredNorm();
  if (norm2 <= 0.0) {
    throw NumericalError("normalized_expectation: state has zero norm");
  }
  return expectation(psi, op) / norm2;
}

Complex determinant(const OperatorMatrix& op) {
  if (op.rows() != op.cols()) {
    throw ConfigError("determinant: matrix is not square");
  }
  return Eigen::PartialPivLU<OperatorMatrix>(op).determinant();
}

OperatorMatrix inverse(const OperatorMatrix& op) {
  if (op.rows() != op.cols()) {
    throw ConfigError("inverse: matrix is not square");
  }
  Eigen::PartialPivLU<OperatorMatrix> lu(op);
  if (std::abs(lu.determinant()) <= 1e-14) {
    throw NumericalError("inverse: operator is numerically singular");
  }
  return lu.inverse();
}

bool is_hermitian(const OperatorMatrix& op, double tol) {
  if (op.rows() != op.cols()) return false;
  return (op - op.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

OperatorMatrix sigma_x() {
  OperatorMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

OperatorMatrix sigma_y() {
  // In the ground-first basis ordering (sigma_z = diag(-1, +1)) the cyclic
  // algebra sigma_x sigma_y = i sigma_z fixes the signs as written here;
  // sigma_y |excited> = i |ground>.
  OperatorMatrix m(2, 2);
  m << Complex(0, 0), Complex(0, 1), Complex(0, -1), Complex(0, 0);
  return m;
}

OperatorMatrix sigma_z() {
  OperatorMatrix m(2, 2);
  m << -1, 0, 0, 1;
  return m;
}

OperatorMatrix sigma_minus() {
  OperatorMatrix m = OperatorMatrix::Zero(2, 2);
  m(0, 1) = 1;
  return m;
}

OperatorMatrix sigma_plus() {
  OperatorMatrix m = OperatorMatrix::Zero(2, 2);
  m(1, 0) = 1;
  return m;
}

StateVector plus_state() {
  StateVector v(2);
  v << 1, 1;
  return v / std::sqrt(2.0);
}

}  // namespace nmqt
