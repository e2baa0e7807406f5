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

#include <string>
#include <vector>

#include "nmqt/ensemble.hpp"

namespace nmqt {

// A declarative run description. All quantities are dimensionless in units
// of the bath memory rate: times in 1/Gamma, frequencies in Gamma. Unknown
// keys are rejected with the offending field path.
//
// Schema (all keys optional except "method"):
//   method         "jump" | "diffusion" | "qsd" | "master"
//   bath           {"g": num, "Gamma": num, "omega_c": num}
//   system         {"omega": num, "Omega": num}
//   initial_state  "plus" | "ground" | "excited" | [[re, im], ...]
//   observables    list of "sigma_x" | "sigma_y" | "sigma_z"
//   ensemble_size  integer >= 1
//   dt, t_end      numbers (defaults 1e-3 and 5)
//   epsilon        number > 0 (default 0.5)
//   m              integer >= 2 (default 2; the family has 2m channels)
//   seed           unsigned 64-bit (default 0)
//   kde_bandwidth  number > 0 (optional override of the M^(-1/(2D+5)) rule)
//   output         CSV path for the run subcommand
//   eps_sweep      list of numbers > 0 (default [1, 0.5, 0.25])
struct Scenario {
  RunConfig config;
  std::string output_path;
  std::vector<double> eps_sweep{1.0, 0.5, 0.25};
};

// Reads and validates a scenario file. Unreadable file -> IoError; malformed
// JSON or schema violation -> ConfigError naming the field path.
Scenario parse_scenario(const std::string& path);

// Same, from an in-memory document (tests and bindings).
Scenario parse_scenario_text(const std::string& text, const std::string& origin = "<inline>");

}  // namespace nmqt
