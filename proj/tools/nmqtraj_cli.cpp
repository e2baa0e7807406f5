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

// Command-line front end: parses one scenario file, delegates to the
// simulation library, and emits plot-ready CSV. Subcommands:
//   run        one scenario -> observable series CSV
//   rates      the complex rate function and its split -> CSV
//   compare    stochastic method vs deterministic reference, side by side
//   sweep-eps  jump-family scale sweep against the diffusion limit
// Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 numerical
// failure.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nmqt/csv.hpp"
#include "nmqt/ensemble.hpp"
#include "nmqt/errors.hpp"
#include "nmqt/scenario.hpp"

namespace {

struct CommonArgs {
  std::string scenario_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  unsigned workers = 0;
  std::string method_override;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_method) {
  cmd->add_option("--scenario", args.scenario_path, "Scenario file (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", args.out_path, "Output CSV path (overrides the scenario's output key)");
  cmd->add_option("--seed", args.seed, "Override the scenario seed");
  cmd->add_option("--workers", args.workers,
                  "Worker threads (0 = one per hardware thread; affects speed only)");
  if (with_method) {
    cmd->add_option("--method", args.method_override,
                    "Override the scenario method (jump, diffusion, qsd, master)");
  }
  cmd->add_flag("--quiet", args.quiet, "Suppress the step counter on standard error");
}

nmqt::Scenario load_scenario(const CommonArgs& args) {
  nmqt::Scenario scenario = nmqt::parse_scenario(args.scenario_path);
  if (args.seed) scenario.config.seed = *args.seed;
  scenario.config.workers = args.workers;
  if (!args.method_override.empty()) {
    scenario.config.method = nmqt::parse_method(args.method_override);
  }
  return scenario;
}

std::string resolve_out(const CommonArgs& args, const nmqt::Scenario& scenario) {
  if (!args.out_path.empty()) return args.out_path;
  if (!scenario.output_path.empty()) return scenario.output_path;
  throw nmqt::ConfigError("no output path: set \"output\" in the scenario or pass --out");
}

void attach_progress(nmqt::RunConfig& config, bool quiet, const std::string& label) {
  if (quiet) return;
  config.progress = [label](std::size_t done, std::size_t total) {
    const std::size_t tick = std::max<std::size_t>(total / 20, 1);
    if (done % tick == 0 || done == total) {
      std::cerr << '\r' << label << ": step " << done << '/' << total;
      if (done == total) std::cerr << '\n';
      std::cerr.flush();
    }
  };
}

void report_run(const nmqt::ObservableSeries& series) {
  if (series.large_probability_warning) {
    std::cerr << "warning: some step's total event probability reached 0.1; "
                 "reduce dt for a cleaner one-event-per-step regime\n";
  }
  if (series.unreliable) {
    std::cerr << "warning: more than 1% of (trajectory, step) pairs were far from the "
                 "ensemble's support; results are unreliable\n";
  }
  std::cout << "steps: " << series.size() - 1 << ", forward events: " << series.forward_events
            << ", reverse events: " << series.reverse_events << '\n';
}

int cmd_run(const CommonArgs& args, const std::string& dump_path,
            const std::string& raw_means_path) {
  nmqt::Scenario scenario = load_scenario(args);
  const std::string out = resolve_out(args, scenario);
  scenario.config.record_trajectories = !dump_path.empty();
  attach_progress(scenario.config, args.quiet, nmqt::method_name(scenario.config.method));

  const nmqt::RunResult result = nmqt::run_ensemble(scenario.config);
  nmqt::emit_csv(result.series, out);
  if (!raw_means_path.empty()) nmqt::emit_raw_means_csv(result.series, raw_means_path);
  if (!dump_path.empty()) {
    nmqt::emit_trajectory_csv(result.series, result.trajectory_records, dump_path);
  }
  report_run(result.series);
  std::cout << "wrote " << out << '\n';
  return 0;
}

int cmd_rates(const CommonArgs& args) {
  nmqt::Scenario scenario = load_scenario(args);
  const std::string out = resolve_out(args, scenario);
  const nmqt::RunConfig& config = scenario.config;
  // Solve on the half-step grid the engine uses; emit the run grid.
  const nmqt::RateSchedule rates = nmqt::solve_rate_function(
      config.bath, config.system.omega, config.t_end, config.dt / 2.0);
  nmqt::emit_rates_csv(rates, out, 2);
  std::cout << "wrote " << out << '\n';
  return 0;
}

int cmd_compare(const CommonArgs& args) {
  nmqt::Scenario scenario = load_scenario(args);
  const std::string out = resolve_out(args, scenario);
  if (scenario.config.method == nmqt::Method::master) {
    throw nmqt::ConfigError("compare: pick a stochastic method (jump, diffusion, or qsd)");
  }

  attach_progress(scenario.config, args.quiet, nmqt::method_name(scenario.config.method));
  const nmqt::RunResult stochastic = nmqt::run_ensemble(scenario.config);

  nmqt::RunConfig reference_config = scenario.config;
  reference_config.method = nmqt::Method::master;
  reference_config.progress = nullptr;
  const nmqt::RunResult reference = nmqt::run_ensemble(reference_config);

  nmqt::emit_compare_csv(stochastic.series, reference.series, out);
  report_run(stochastic.series);

  // Largest |deviation| / SE over all observables and grid points with a
  // nonzero SE (the shared initial point has zero variance by construction).
  double worst = 0.0;
  std::string worst_name = "-";
  double worst_t = 0.0;
  for (std::size_t i = 0; i < stochastic.series.names.size(); ++i) {
    for (std::size_t j = 0; j < stochastic.series.size(); ++j) {
      const double se = stochastic.series.standard_errors[i][j];
      if (!(se > 0.0)) continue;
      const double ratio =
          std::abs(stochastic.series.estimates[i][j] - reference.series.estimates[i][j]) / se;
      if (ratio > worst) {
        worst = ratio;
        worst_name = stochastic.series.names[i];
        worst_t = stochastic.series.times[j];
      }
    }
  }
  std::cout << "max |deviation|/SE = " << worst << " (" << worst_name << " at t = " << worst_t
            << ")\n";
  std::cout << "wrote " << out << '\n';
  return 0;
}

int cmd_sweep(const CommonArgs& args) {
  nmqt::Scenario scenario = load_scenario(args);
  const std::string out = resolve_out(args, scenario);
  if (scenario.config.observables.empty()) {
    throw nmqt::ConfigError("sweep-eps: the scenario needs at least one observable");
  }
  const std::string& obs_name = scenario.config.observables.front().name;

  // The diffusion-limit reference, then the jump method at every scale, all
  // from the same seed.
  nmqt::RunConfig diffusion_config = scenario.config;
  diffusion_config.method = nmqt::Method::diffusion;
  attach_progress(diffusion_config, args.quiet, "diffusion");
  const nmqt::RunResult diffusion = nmqt::run_ensemble(diffusion_config);

  std::vector<nmqt::SweepRow> rows;
  rows.reserve(scenario.eps_sweep.size());
  for (const double eps : scenario.eps_sweep) {
    nmqt::RunConfig jump_config = scenario.config;
    jump_config.method = nmqt::Method::jump;
    jump_config.epsilon = eps;
    attach_progress(jump_config, args.quiet, "jump eps=" + std::to_string(eps));
    const nmqt::RunResult jump = nmqt::run_ensemble(jump_config);

    nmqt::SweepRow row;
    row.epsilon = eps;
    double se_sq = 0.0;
    for (std::size_t j = 0; j < jump.series.size(); ++j) {
      const double dev = jump.series.estimates[0][j] - diffusion.series.estimates[0][j];
      row.integrated_abs_deviation += std::abs(dev);
      const double se_j = jump.series.standard_errors[0][j];
      const double se_d = diffusion.series.standard_errors[0][j];
      se_sq += se_j * se_j + se_d * se_d;
    }
    row.integrated_abs_deviation *= scenario.config.dt;
    row.combined_se = scenario.config.dt * std::sqrt(se_sq);
    rows.push_back(row);
    std::cout << "epsilon = " << eps << ": integrated |<" << obs_name << ">_jump - <" << obs_name
              << ">_diffusion| = " << row.integrated_abs_deviation
              << " (combined SE " << row.combined_se << ")\n";
  }

  nmqt::emit_sweep_csv(rows, out);
  std::cout << "wrote " << out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Non-Markovian trajectory unravelings: time-local master equation, "
               "jump / diffusion / state-diffusion ensembles, and rate-function export"};
  app.require_subcommand(1);

  CommonArgs run_args;
  std::string dump_path;
  std::string raw_means_path;
  CLI::App* run = app.add_subcommand("run", "Run one scenario and write the observable CSV");
  add_common(run, run_args, true);
  run->add_option("--dump-trajectories", dump_path,
                  "Also write per-trajectory normalized expectations to this CSV");
  run->add_option("--raw-means", raw_means_path,
                  "Also write the plain (non-ratio) sample means to this CSV");

  CommonArgs rates_args;
  CLI::App* rates = app.add_subcommand("rates", "Export the rate function F(t) and its split");
  add_common(rates, rates_args, false);

  CommonArgs compare_args;
  CLI::App* compare = app.add_subcommand(
      "compare", "Run a stochastic method against the deterministic reference");
  add_common(compare, compare_args, true);

  CommonArgs sweep_args;
  CLI::App* sweep = app.add_subcommand(
      "sweep-eps", "Jump-family scale sweep against the diffusion limit");
  add_common(sweep, sweep_args, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(nmqt::ExitCode::config);
  }

  try {
    if (run->parsed()) return cmd_run(run_args, dump_path, raw_means_path);
    if (rates->parsed()) return cmd_rates(rates_args);
    if (compare->parsed()) return cmd_compare(compare_args);
    if (sweep->parsed()) return cmd_sweep(sweep_args);
  } catch (const nmqt::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(nmqt::ExitCode::numerical);
  }
  return 0;
}
