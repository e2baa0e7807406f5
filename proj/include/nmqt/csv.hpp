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

#include <iosfwd>
#include <string>
#include <vector>

#include "nmqt/bath.hpp"
#include "nmqt/ensemble.hpp"

namespace nmqt {

// All emitters serialize floating-point values with 17 significant digits,
// enough for an exact double round-trip, and throw IoError on any failure to
// open or write the target path.

// The run schema: header, then per step
//   t, <name>, <name>_se (per observable, in declared order), trace,
//   trace_se, flagged_fraction
void emit_csv(const ObservableSeries& series, std::ostream& os);
void emit_csv(const ObservableSeries& series, const std::string& path);

// Rate function export: t, re_f, im_f, gamma_plus, gamma_minus. `stride`
// emits every stride-th node (the engine solves on a half-step grid; stride 2
// recovers the run grid).
void emit_rates_csv(const RateSchedule& rates, std::ostream& os, std::size_t stride = 1);
void emit_rates_csv(const RateSchedule& rates, const std::string& path, std::size_t stride = 1);

// Side-by-side comparison of a stochastic run against the deterministic
// reference on the same grid: per observable the columns are
//   <name>, <name>_se, <name>_ref, <name>_dev   (dev = value - ref)
// followed by trace, trace_se, flagged_fraction of the stochastic run.
void emit_compare_csv(const ObservableSeries& series, const ObservableSeries& reference,
                      std::ostream& os);
void emit_compare_csv(const ObservableSeries& series, const ObservableSeries& reference,
                      const std::string& path);

// Plain sample means (the diagnostic counterpart of the trace-ratio
// estimates): t, then <name>_raw per observable.
void emit_raw_means_csv(const ObservableSeries& series, std::ostream& os);
void emit_raw_means_csv(const ObservableSeries& series, const std::string& path);

// Per-trajectory normalized expectations from a record_trajectories run:
// t, then <name>_<nu> for each observable and trajectory.
void emit_trajectory_csv(const ObservableSeries& series,
                         const std::vector<Eigen::MatrixXd>& records, std::ostream& os);
void emit_trajectory_csv(const ObservableSeries& series,
                         const std::vector<Eigen::MatrixXd>& records, const std::string& path);

// One row per jump-family scale in the convergence study.
struct SweepRow {
  double epsilon = 0.0;
  double integrated_abs_deviation = 0.0;  // dt * sum_j |<O>_jump - <O>_diffusion|
  double combined_se = 0.0;               // dt * sqrt(sum_j (se_jump^2 + se_diff^2))
};

void emit_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& os);
void emit_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path);

}  // namespace nmqt
