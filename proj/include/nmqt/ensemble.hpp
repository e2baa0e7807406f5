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

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nmqt/bath.hpp"
#include "nmqt/kde.hpp"
#include "nmqt/linalg.hpp"
#include "nmqt/master.hpp"

namespace nmqt {

enum class Method { jump, diffusion, qsd, master };

// Round-trips with the scenario file's "method" key.
Method parse_method(const std::string& name);
std::string method_name(Method method);

struct NamedObservable {
  std::string name;
  OperatorMatrix op;
};

// Everything one run needs. Times are in units of 1/Gamma and frequencies in
// units of Gamma throughout.
struct RunConfig {
  Method method = Method::jump;
  std::size_t ensemble_size = 3000;
  double dt = 1e-3;
  double t_end = 5.0;
  double epsilon = 0.5;  // jump-family scale (jump method only)
  int m_channels = 2;    // half the number of jump channels
  std::uint64_t seed = 0;
  unsigned workers = 0;  // 0 = one per hardware thread; affects speed only
  SystemSpec system;
  BathSpec bath;
  StateVector initial_state;
  std::vector<NamedObservable> observables;
  std::optional<double> kde_bandwidth_override;

  // Test hook: forces the state-diffusion noise to zero (consuming no random
  // draws), turning every trajectory into the deterministic RK4 solution.
  bool qsd_zero_noise = false;

  // Diagnostic: record per-trajectory normalized expectations (intended for
  // small ensembles; memory scales as M * steps * observables).
  bool record_trajectories = false;

  // Invoked from the serial region after each completed step with
  // (completed, total). Purely cosmetic; never affects results.
  std::function<void(std::size_t, std::size_t)> progress;

  // Number of dt steps; throws ConfigError unless dt divides t_end within
  // rounding.
  std::size_t steps() const;
  void validate() const;
};

// Per-step ensemble estimates on the full grid (times[0] = 0). For each
// observable O the estimate is the trace-ratio form
//   sum_nu Re<psi^nu|O|psi^nu> / sum_nu <psi^nu|psi^nu>,
// which removes the norm fluctuation of the linear unravelings; the plain
// sample mean of Re<psi|O|psi> is kept alongside (raw_means) for comparison
// but is not part of the serialized schema. The standard error comes from
// the per-trajectory variance of Re<psi|O|psi> divided by sqrt(M).
struct ObservableSeries {
  std::vector<double> times;
  std::vector<std::string> names;
  std::vector<std::vector<double>> estimates;        // [observable][step]
  std::vector<std::vector<double>> standard_errors;  // [observable][step]
  std::vector<std::vector<double>> raw_means;        // [observable][step]
  std::vector<double> trace;                         // mean <psi|psi>
  std::vector<double> trace_se;
  std::vector<double> flagged_fraction;  // far-from-ensemble events this step / M

  // Event diagnostics (stochastic methods).
  std::uint64_t forward_events = 0;
  std::uint64_t reverse_events = 0;
  bool large_probability_warning = false;  // some step's total event probability reached 0.1
  bool unreliable = false;                 // flagged (trajectory, step) pairs exceed 1%

  std::size_t size() const { return times.size(); }
};

struct RunResult {
  ObservableSeries series;
  EnsembleSnapshot final_snapshot;  // empty for method = master

  // Filled only when record_trajectories is set: per observable, an
  // (M x steps+1) matrix of normalized expectations <O>_nu(t_j).
  std::vector<Eigen::MatrixXd> trajectory_records;
};

// Runs M trajectories of the configured method in lockstep on the shared
// grid. Per step: the ensemble is frozen into a snapshot, a KdeContext is
// built when the method consumes densities and the reverse rate is open,
// all trajectories advance in parallel, and observables are recorded.
// Deterministic given (seed, config) for any worker count. A trajectory
// overflow or singularity aborts the run with the step index and trajectory
// id in the error message.
RunResult run_ensemble(const RunConfig& config);

// Sample-mean projector estimate rho_hat = (1/M) sum_nu |psi^nu><psi^nu|
// with the elementwise standard error sqrt(Var[outer product entry] / M)
// (complex variance: mean squared distance from the entry mean).
struct DensityEstimate {
  DensityMatrix rho;
  Eigen::MatrixXd standard_error;
};

DensityEstimate estimate_density_matrix(const EnsembleSnapshot& snapshot);

// Trace-ratio observable estimate Re tr(O rho_hat) / tr rho_hat. Requires a
// Hermitian observable; throws NumericalError when tr rho_hat <= 0 (the
// ensemble has degenerated).
double observable_from_density(const DensityMatrix& rho_hat, const OperatorMatrix& op);

}  // namespace nmqt
