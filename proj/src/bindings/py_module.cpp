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

// Python bindings for the main operations: scenario-driven ensemble runs,
// the decay-rate solver, and the small deterministic helpers (bandwidth
// rule, counter-based RNG blocks, jump-family diagnostics). Everything is
// returned as plain Python containers so callers need nothing but the
// standard library and, optionally, numpy on their side.

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nmqt/bath.hpp"
#include "nmqt/ensemble.hpp"
#include "nmqt/errors.hpp"
#include "nmqt/jump.hpp"
#include "nmqt/kde.hpp"
#include "nmqt/rng.hpp"
#include "nmqt/scenario.hpp"

namespace py = pybind11;

namespace {

py::dict series_to_dict(const nmqt::ObservableSeries& series) {
  py::dict out;
  out["times"] = series.times;
  out["names"] = series.names;
  out["estimates"] = series.estimates;
  out["standard_errors"] = series.standard_errors;
  out["raw_means"] = series.raw_means;
  out["trace"] = series.trace;
  out["trace_se"] = series.trace_se;
  out["flagged_fraction"] = series.flagged_fraction;
  out["forward_events"] = series.forward_events;
  out["reverse_events"] = series.reverse_events;
  out["large_probability_warning"] = series.large_probability_warning;
  out["unreliable"] = series.unreliable;
  return out;
}

py::dict run_scenario(const std::string& path, std::optional<std::uint64_t> seed,
                      int workers, std::optional<std::string> method) {
  nmqt::Scenario scenario = nmqt::parse_scenario(path);
  nmqt::RunConfig config = scenario.config;
  if (seed) config.seed = *seed;
  if (method) config.method = nmqt::parse_method(*method);
  config.workers = workers;
  config.validate();

  nmqt::RunResult result;
  {
    // The ensemble loop is pure C++; let other Python threads run meanwhile.
    py::gil_scoped_release release;
    result = nmqt::run_ensemble(config);
  }
  return series_to_dict(result.series);
}

py::dict solve_rates(double g, double gamma, double omega_c, double omega,
                     double t_end, double dt) {
  const nmqt::BathSpec bath{g, gamma, omega_c};
  bath.validate();
  nmqt::RateSchedule schedule;
  {
    py::gil_scoped_release release;
    schedule = nmqt::solve_rate_function(bath, omega, t_end, dt);
  }
  py::dict out;
  out["t"] = schedule.t;
  out["f"] = schedule.f;
  out["s"] = schedule.s;
  out["gamma_plus"] = schedule.gamma_plus;
  out["gamma_minus"] = schedule.gamma_minus;
  return out;
}

std::vector<std::uint32_t> philox_block(std::uint64_t seed, std::uint64_t stream,
                                        std::uint64_t index) {
  const nmqt::Philox4x32 gen(seed, stream);
  const auto block = gen.block(index);
  return {block.begin(), block.end()};
}

py::dict jump_family_info(double epsilon, int m_channels) {
  nmqt::SystemSpec system = nmqt::make_two_level_system(2.0, 0.5);
  const nmqt::JumpFamily family =
      nmqt::build_jump_family(system.coupling, epsilon, m_channels);
  py::dict out;
  out["channels"] = family.channels();
  out["xi"] = family.xi;
  out["det_factor"] = family.det_factor;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, module) {
  module.doc() =
      "Non-Markovian trajectory toolkit: ensemble runs of the jump, diffusion "
      "and coherent-noise unravelings, plus the deterministic helpers they "
      "are built from.";

  module.attr("__version__") = "1.0.0";

  // Translate the library's error hierarchy into Python exceptions that feel
  // native: configuration problems -> ValueError, I/O -> OSError, numerical
  // breakdown -> RuntimeError.
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const nmqt::ConfigError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const nmqt::IoError& e) {
      PyErr_SetString(PyExc_OSError, e.what());
    } catch (const nmqt::NumericalError& e) {
      PyErr_SetString(PyExc_RuntimeError, e.what());
    }
  });

  module.def("run_scenario", &run_scenario, py::arg("path"),
             py::arg("seed") = py::none(), py::arg("workers") = 0,
             py::arg("method") = py::none(),
             "Run the ensemble described by a scenario file and return the "
             "observable series as a dict of plain lists. `seed` and `method` "
             "override the scenario when given; `workers` = 0 uses all cores "
             "(the result is identical for every worker count).");

  module.def("solve_rates", &solve_rates, py::arg("g"), py::arg("gamma"),
             py::arg("omega_c"), py::arg("omega"), py::arg("t_end"),
             py::arg("dt"),
             "Integrate the rate equation for an exponential bath correlation "
             "and return the grid, the complex rate F, its imaginary part s, "
             "and the non-negative split gamma_plus/gamma_minus.");

  module.def("kde_bandwidth", &nmqt::kde_bandwidth, py::arg("ensemble_size"),
             py::arg("dim"),
             "Default Gaussian kernel bandwidth for an ensemble of the given "
             "size over states of the given complex dimension.");

  module.def("philox_block", &philox_block, py::arg("seed"), py::arg("stream"),
             py::arg("index"),
             "The four 32-bit words of the counter-based generator block at "
             "`index` for the (seed, stream) pair. Pure function: the same "
             "arguments always return the same words.");

  module.def("jump_family_info", &jump_family_info, py::arg("epsilon"),
             py::arg("m") = 2,
             "Channel phases, channel count and reverse-weight determinant "
             "factors of the jump-operator family at the given epsilon, built "
             "on the two-level lowering operator.");
}
