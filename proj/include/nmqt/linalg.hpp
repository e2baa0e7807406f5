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
#include <complex>

namespace nmqt {

using Complex = std::complex<double>;

// Unnormalized trajectory state: the linear unravelings drift in norm, so no
// normalization is implied anywhere in the library. Basis convention for the
// two-level atom: index 0 = ground, index 1 = excited.
using StateVector = Eigen::VectorXcd;
using OperatorMatrix = Eigen::MatrixXcd;
using DensityMatrix = Eigen::MatrixXcd;

// <psi|O|psi>, the unnormalized quadratic form.
Complex expectation(const StateVector& psi, const OperatorMatrix& op);

// <psi|O|psi> / <psi|psi>.
Complex normalized_expectation(const StateVector& psi, const OperatorMatrix& op);

// Determinant via LU with partial pivoting; singular matrices return 0.
Complex determinant(const OperatorMatrix& op);

// Matrix inverse; throws NumericalError when |det| <= 1e-14.
OperatorMatrix inverse(const OperatorMatrix& op);

bool is_hermitian(const OperatorMatrix& op, double tol = 1e-12);

// Two-level operators in the ground/excited basis above.
OperatorMatrix sigma_x();
OperatorMatrix sigma_y();
OperatorMatrix sigma_z();
OperatorMatrix sigma_minus();  // |0><1|
OperatorMatrix sigma_plus();   // |1><0|

// (|0> + |1>)/sqrt(2)
StateVector plus_state();

}  // namespace nmqt
