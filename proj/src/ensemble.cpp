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

#include "nmqt/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "nmqt/diffusion.hpp"
#include "nmqt/drift.hpp"
#include "nmqt/errors.hpp"
#include "nmqt/jump.hpp"
#include "nmqt/parallel.hpp"
#include "nmqt/qsd.hpp"
#include "nmqt/rng.hpp"

namespace nmqt {

Method parse_method(const std::string& name) {
  if (name == "jump") return Method::jump;
  if (name == "diffusion") return Method::diffusion;
  if (name == "qsd") return Method::qsd;
  if (name == "master") return Method::master;
  throw ConfigError("method: expected one of jump, diffusion, qsd, master; got \"" + name + "\"");
}

std::string method_name(Method method) {
  switch (method) {
    case Method::jump: return "jump";
    case Method::diffusion: return "diffusion";
    case Method::qsd: return "qsd";
    case Method::master: return "master";
  }
  throw ConfigError("method: invalid enum value");
}

std::size_t RunConfig::steps() const {
  if (!(dt > 0.0) || !(t_end > 0.0)) throw ConfigError("run: dt and t_end must be positive");
  const auto n = static_cast<std::size_t>(std::llround(t_end / dt));
  if (n == 0 || std::abs(static_cast<double>(n) * dt - t_end) > 1e-9 * std::max(1.0, t_end)) {
    throw ConfigError("run: dt must divide t_end within rounding");
  }
  return n;
}

void RunConfig::validate() const {
  system.validate();
  bath.validate();
  steps();
  if (ensemble_size < 1) throw ConfigError("run: ensemble size must be at least 1");
  if ((method == Method::jump || method == Method::diffusion) && ensemble_size < 2) {
    throw ConfigError("run: methods jump and diffusion need an ensemble of at least 2 "
                      "(the density estimate has no meaning for a single trajectory)");
  }
  if (method == Method::jump) {
    if (!(epsilon > 0.0)) throw ConfigError("run: epsilon must be > 0 for the jump method");
    if (m_channels < 2) throw ConfigError("run: at least m = 2 jump channel pairs are required");
  }
  if (initial_state.size() != system.dim()) {
    throw ConfigError("run: initial state dimension does not match the system");
  }
  if (!(initial_state.squaredNorm() > 0.0)) {
    throw ConfigError("run: initial state must be nonzero");
  }
  for (const auto& obs : observables) {
    if (obs.name.empty()) throw ConfigError("run: every observable needs a name");
    if (obs.op.rows() != system.dim() || obs.op.cols() != system.dim()) {
      throw ConfigError("run: observable \"" + obs.name + "\" dimension mismatch");
    }
    if (!is_hermitian(obs.op)) {
      throw ConfigError("run: observable \"" + obs.name + "\" must be Hermitian");
    }
  }
  if (kde_bandwidth_override && !(*kde_bandwidth_override > 0.0)) {
    throw ConfigError("run: kde bandwidth override must be > 0");
  }
}

namespace {

unsigned resolve_workers(unsigned requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

ObservableSeries make_series(const RunConfig& config, std::size_t n) {
  ObservableSeries series;
  const std::size_t n_obs = config.observables.size();
  series.times.resize(n + 1);
  for (std::size_t j = 0; j <= n; ++j) series.times[j] = static_cast<double>(j) * config.dt;
  series.names.reserve(n_obs);
  for (const auto& obs : config.observables) series.names.push_back(obs.name);
  series.estimates.assign(n_obs, std::vector<double>(n + 1, 0.0));
  series.standard_errors.assign(n_obs, std::vector<double>(n + 1, 0.0));
  series.raw_means.assign(n_obs, std::vector<double>(n + 1, 0.0));
  series.trace.assign(n + 1, 0.0);
  series.trace_se.assign(n + 1, 0.0);
  series.flagged_fraction.assign(n + 1, 0.0);
  return series;
}

// Per-trajectory quadratic forms for one grid row, filled in parallel and
// reduced serially in trajectory order so the emitted numbers are identical
// for every worker partition.
struct RowScratch {
  Eigen::MatrixXd values;  // n_obs x M, Re<psi|O_i|psi>
  Eigen::VectorXd norms;   // <psi|psi>
};

void compute_row_entry(const Eigen::MatrixXcd& states, const std::vector<NamedObservable>& obs,
                       std::size_t nu, RowScratch& scratch) {
  const auto psi = states.col(nu);
  scratch.norms[static_cast<Eigen::Index>(nu)] = psi.squaredNorm();
  for (std::size_t i = 0; i < obs.size(); ++i) {
    scratch.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(nu)) =
        psi.dot(obs[i].op * psi).real();
  }
}

void reduce_row(const RowScratch& scratch, std::size_t step, std::size_t m_count,
                std::size_t flagged_events, ObservableSeries& series) {
  const auto m_d = static_cast<double>(m_count);
  const auto m_idx = static_cast<Eigen::Index>(m_count);

  double norm_sum = 0.0;
  for (Eigen::Index nu = 0; nu < m_idx; ++nu) norm_sum += scratch.norms[nu];
  if (!(norm_sum > 0.0) || !std::isfinite(norm_sum)) {
    throw NumericalError("ensemble degenerated: total squared norm is not positive at t = " +
                         std::to_string(series.times[step]));
  }
  const double trace_mean = norm_sum / m_d;
  double norm_var = 0.0;
  for (Eigen::Index nu = 0; nu < m_idx; ++nu) {
    const double dev = scratch.norms[nu] - trace_mean;
    norm_var += dev * dev;
  }
  series.trace[step] = trace_mean;
  series.trace_se[step] =
      m_count > 1 ? std::sqrt(norm_var / (m_d - 1.0) / m_d) : 0.0;

  const auto n_obs = static_cast<Eigen::Index>(series.names.size());
  for (Eigen::Index i = 0; i < n_obs; ++i) {
    double q_sum = 0.0;
    for (Eigen::Index nu = 0; nu < m_idx; ++nu) q_sum += scratch.values(i, nu);
    const double raw_mean = q_sum / m_d;
    double q_var = 0.0;
    for (Eigen::Index nu = 0; nu < m_idx; ++nu) {
      const double dev = scratch.values(i, nu) - raw_mean;
      q_var += dev * dev;
    }
    series.estimates[static_cast<std::size_t>(i)][step] = q_sum / norm_sum;
    series.raw_means[static_cast<std::size_t>(i)][step] = raw_mean;
    series.standard_errors[static_cast<std::size_t>(i)][step] =
        m_count > 1 ? std::sqrt(q_var / (m_d - 1.0) / m_d) : 0.0;
  }

  series.flagged_fraction[step] = static_cast<double>(flagged_events) / m_d;
}

[[noreturn]] void rethrow_with_context(std::size_t nu, std::size_t step, double t_next,
                                       const char* what) {
  throw NumericalError("trajectory " + std::to_string(nu) + " aborted at step " +
                       std::to_string(step) + " (t = " + std::to_string(t_next) + "): " + what);
}

RunResult run_master(const RunConfig& config, const RateSchedule& rates, std::size_t n) {
  StateVector psi0 = config.initial_state;
  psi0 /= psi0.norm();
  const DensityMatrix rho0 = psi0 * psi0.adjoint();
  const std::vector<DensityMatrix> rhos = integrate_master(rho0, config.system, rates, config.dt, n);

  RunResult result;
  result.series = make_series(config, n);
  const std::size_t n_obs = config.observables.size();
  for (std::size_t j = 0; j <= n; ++j) {
    const double tr = rhos[j].trace().real();
    result.series.trace[j] = tr;
    for (std::size_t i = 0; i < n_obs; ++i) {
      const double raw = (config.observables[i].op * rhos[j]).trace().real();
      result.series.raw_means[i][j] = raw;
      result.series.estimates[i][j] = raw / tr;
    }
  }
  return result;
}

RunResult run_stochastic(const RunConfig& config, const RateSchedule& rates, std::size_t n) {
  const std::size_t m_count = config.ensemble_size;
  const Eigen::Index dim = config.system.dim();
  const unsigned workers = resolve_workers(config.workers);
  const double dt = config.dt;

  StateVector psi0 = config.initial_state;
  psi0 /= psi0.norm();

  Eigen::MatrixXcd states(dim, static_cast<Eigen::Index>(m_count));
  for (std::size_t nu = 0; nu < m_count; ++nu) {
    states.col(static_cast<Eigen::Index>(nu)) = psi0;
  }

  // One counter-based stream per trajectory, keyed by (seed, trajectory id):
  // a trajectory's draws are a pure function of its id, never of scheduling.
  std::vector<RngStream> streams;
  streams.reserve(m_count);
  for (std::size_t nu = 0; nu < m_count; ++nu) streams.emplace_back(config.seed, nu);

  const bool is_jump = config.method == Method::jump;
  const bool is_diffusion = config.method == Method::diffusion;
  const bool is_qsd = config.method == Method::qsd;
  const bool needs_kde = is_jump || is_diffusion;
  const bool needs_propagator = is_jump || is_diffusion;

  JumpFamily family;
  if (is_jump) family = build_jump_family(config.system.coupling, config.epsilon, config.m_channels);

  // Colored-noise state for the state-diffusion method: the per-trajectory
  // path is advanced in place with the exact one-step recursion, drawing from
  // the trajectory's own stream (identical to materializing sample_ou_path
  // up front, without the M x steps storage).
  OuRecursion ou{};
  std::vector<Complex> z_cur;
  if (is_qsd) {
    z_cur.assign(m_count, Complex(0.0, 0.0));
    if (!config.qsd_zero_noise) {
      ou = ou_recursion(config.bath, dt);
      for (std::size_t nu = 0; nu < m_count; ++nu) z_cur[nu] = ou.initial(streams[nu]);
    }
  }

  // Flow matrices A(t) = -i H - F(t) L'L at every half-step node; the
  // one-step propagator for step j is assembled from nodes 2j, 2j+1, 2j+2.
  std::vector<OperatorMatrix> flows;
  if (needs_propagator) {
    const OperatorMatrix ldl = config.system.coupling.adjoint() * config.system.coupling;
    const OperatorMatrix minus_ih = Complex(0.0, -1.0) * config.system.h;
    flows.resize(rates.size());
    for (std::size_t k = 0; k < rates.size(); ++k) flows[k] = minus_ih - rates.f[k] * ldl;
  }

  const double sigma = config.kde_bandwidth_override
                           ? *config.kde_bandwidth_override
                           : (needs_kde ? kde_bandwidth(m_count, dim) : 0.0);

  RunResult result;
  result.series = make_series(config, n);
  ObservableSeries& series = result.series;
  const std::size_t n_obs = config.observables.size();

  if (config.record_trajectories) {
    result.trajectory_records.assign(
        n_obs, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m_count),
                                     static_cast<Eigen::Index>(n + 1)));
  }

  RowScratch scratch{Eigen::MatrixXd(static_cast<Eigen::Index>(n_obs),
                                     static_cast<Eigen::Index>(m_count)),
                     Eigen::VectorXd(static_cast<Eigen::Index>(m_count))};
  std::vector<std::uint8_t> flag_scratch(m_count, 0);
  std::vector<std::uint8_t> large_prob(m_count, 0);
  std::vector<std::uint32_t> fwd_count(m_count, 0);
  std::vector<std::uint32_t> rev_count(m_count, 0);
  std::uint64_t total_flagged = 0;

  const auto record_entry = [&](std::size_t nu, std::size_t step) {
    compute_row_entry(states, config.observables, nu, scratch);
    const double norm = scratch.norms[static_cast<Eigen::Index>(nu)];
    if (!std::isfinite(norm) || norm > 1e24) {
      rethrow_with_context(nu, step, static_cast<double>(step) * dt, "state overflowed");
    }
    if (config.record_trajectories && norm > 0.0) {
      for (std::size_t i = 0; i < n_obs; ++i) {
        result.trajectory_records[i](static_cast<Eigen::Index>(nu),
                                     static_cast<Eigen::Index>(step)) =
            scratch.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(nu)) / norm;
      }
    }
  };

  // Row 0: the shared initial condition.
  parallel_for(0, m_count, workers, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t nu = lo; nu < hi; ++nu) record_entry(nu, 0);
  });
  reduce_row(scratch, 0, m_count, 0, series);

  for (std::size_t j = 0; j < n; ++j) {
    const double t = static_cast<double>(j) * dt;
    const double t_next = static_cast<double>(j + 1) * dt;
    const auto r = rates.at(t);

    // Freeze the start-of-step ensemble; the density estimate is only needed
    // while the reverse rate is open.
    std::optional<KdeContext> kde;
    const KdeContext* kde_ptr = nullptr;
    if (needs_kde && r.gamma_minus > 0.0) {
      kde.emplace(EnsembleSnapshot{states}, sigma);
      kde_ptr = &*kde;
    }

    OperatorMatrix propagator;
    if (needs_propagator) {
      propagator = rk4_propagator_from_nodes(flows[2 * j], flows[2 * j + 1], flows[2 * j + 2], dt);
    }

    std::fill(flag_scratch.begin(), flag_scratch.end(), 0);

    parallel_for(0, m_count, workers, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t nu = lo; nu < hi; ++nu) {
        const auto nu_idx = static_cast<Eigen::Index>(nu);
        try {
          if (is_jump) {
            JumpStepResult step = step_trajectory_jump(states.col(nu_idx), t, dt, family,
                                                       propagator, rates, kde_ptr, streams[nu]);
            states.col(nu_idx) = std::move(step.psi);
            if (step.channel >= 0) {
              if (step.channel < family.channels()) {
                ++fwd_count[nu];
              } else {
                ++rev_count[nu];
              }
            }
            if (step.flagged) flag_scratch[nu] = 1;
            if (step.large_probability) large_prob[nu] = 1;
          } else if (is_diffusion) {
            DiffusionStepResult step = step_trajectory_diffusion(
                states.col(nu_idx), t, dt, config.system, propagator, rates, kde_ptr, streams[nu]);
            states.col(nu_idx) = std::move(step.psi);
            if (step.flagged) flag_scratch[nu] = 1;
          } else {
            const Complex z_next =
                config.qsd_zero_noise ? Complex(0.0, 0.0) : ou.advance(z_cur[nu], streams[nu]);
            states.col(nu_idx) = step_trajectory_qsd(states.col(nu_idx), t, dt, z_cur[nu], z_next,
                                                     config.system, rates);
            z_cur[nu] = z_next;
          }
        } catch (const Error& e) {
          rethrow_with_context(nu, j, t_next, e.what());
        }
        record_entry(nu, j + 1);
      }
    });

    std::size_t flagged_events = 0;
    for (std::size_t nu = 0; nu < m_count; ++nu) flagged_events += flag_scratch[nu];
    total_flagged += flagged_events;
    reduce_row(scratch, j + 1, m_count, flagged_events, series);
    if (config.progress) config.progress(j + 1, n);
  }

  for (std::size_t nu = 0; nu < m_count; ++nu) {
    series.forward_events += fwd_count[nu];
    series.reverse_events += rev_count[nu];
    if (large_prob[nu]) series.large_probability_warning = true;
  }
  series.unreliable =
      static_cast<double>(total_flagged) > 0.01 * static_cast<double>(m_count * n);

  result.final_snapshot = EnsembleSnapshot{std::move(states)};
  return result;
}

}  // namespace

RunResult run_ensemble(const RunConfig& config) {
  config.validate();
  const std::size_t n = config.steps();
  // Half-step grid: RK4 midpoints and endpoints are exact schedule nodes.
  const RateSchedule rates =
      solve_rate_function(config.bath, config.system.omega, config.t_end, config.dt / 2.0);
  if (config.method == Method::master) return run_master(config, rates, n);
  return run_stochastic(config, rates, n);
}

DensityEstimate estimate_density_matrix(const EnsembleSnapshot& snapshot) {
  const Eigen::Index m_count = snapshot.size();
  const Eigen::Index dim = snapshot.dim();
  if (m_count < 1) throw ConfigError("density estimate: the snapshot is empty");

  const double m_d = static_cast<double>(m_count);
  DensityEstimate est;
  est.rho = (snapshot.states * snapshot.states.adjoint()) / m_d;
  est.standard_error = Eigen::MatrixXd::Zero(dim, dim);
  if (m_count >= 2) {
    // Elementwise complex variance: mean squared distance of per-trajectory
    // projector entries from their mean, with the usual 1/(M-1) correction.
    Eigen::MatrixXd sq_dev = Eigen::MatrixXd::Zero(dim, dim);
    for (Eigen::Index nu = 0; nu < m_count; ++nu) {
      const auto psi = snapshot.states.col(nu);
      const DensityMatrix outer = psi * psi.adjoint();
      sq_dev += (outer - est.rho).cwiseAbs2();
    }
    est.standard_error = (sq_dev / (m_d - 1.0) / m_d).cwiseSqrt();
  }
  return est;
}

double observable_from_density(const DensityMatrix& rho_hat, const OperatorMatrix& op) {
  if (rho_hat.rows() != rho_hat.cols()) throw ConfigError("density estimate must be square");
  if (op.rows() != rho_hat.rows() || op.cols() != rho_hat.cols()) {
    throw ConfigError("observable and density estimate dimensions do not match");
  }
  if (!is_hermitian(op)) throw ConfigError("observable must be Hermitian");
  const double tr = rho_hat.trace().real();
  if (!(tr > 0.0)) {
    throw NumericalError("degenerate ensemble: density estimate trace is not positive");
  }
  return (op * rho_hat).trace().real() / tr;
}

}  // namespace nmqt
