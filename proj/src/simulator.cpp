#include "ccm/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace ccm {

std::string to_string(SimulationStatus status)
{
  switch (status) {
    case SimulationStatus::HorizonReached: return "horizon_reached";
    case SimulationStatus::Converged: return "converged";
    case SimulationStatus::Diverged: return "diverged";
    case SimulationStatus::ControllerFailed: return "controller_failed";
  }
  return "unknown";
}

std::string to_string(Verdict verdict)
{
  return verdict == Verdict::Stabilized ? "stabilized" : "not_stabilized";
}

void SimulationOptions::validate() const
{
  if (!(horizon > 0.0)) { throw std::invalid_argument("simulate: horizon must be positive"); }
  if (!(dt_ctrl > 0.0) || !(dt_int > 0.0)) { throw std::invalid_argument("simulate: time steps must be positive"); }
  if (dt_int > dt_ctrl * (1.0 + 1e-12)) { throw std::invalid_argument("simulate: need dt_int <= dt_ctrl"); }
  if (!(divergence_threshold > 0.0)) { throw std::invalid_argument("simulate: divergence threshold must be positive"); }
}

double Trajectory::mean_solve_time() const
{
  if (solve_times.empty()) { return 0.0; }
  return std::accumulate(solve_times.begin(), solve_times.end(), 0.0) / static_cast<double>(solve_times.size());
}

double Trajectory::max_solve_time() const
{
  return solve_times.empty() ? 0.0 : *std::max_element(solve_times.begin(), solve_times.end());
}

Eigen::VectorXd rk4_step(const SystemModel & system, const Eigen::VectorXd & x, const Eigen::VectorXd & u, double t,
                         double h)
{
  const Eigen::VectorXd k1 = system.dynamics(x, u, t);
  const Eigen::VectorXd k2 = system.dynamics(x + 0.5 * h * k1, u, t + 0.5 * h);
  const Eigen::VectorXd k3 = system.dynamics(x + 0.5 * h * k2, u, t + 0.5 * h);
  const Eigen::VectorXd k4 = system.dynamics(x + h * k3, u, t + h);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Trajectory simulate(const SystemModel & system, const FeedbackLaw & law, const Eigen::VectorXd & x0,
                    const SimulationOptions & options)
{
  options.validate();
  if (x0.size() != system.n()) { throw std::invalid_argument("simulate: initial state has wrong dimension"); }
  if (!law) { throw std::invalid_argument("simulate: empty feedback law"); }

  const long steps = std::lround(options.horizon / options.dt_ctrl);
  const long substeps = std::max(1L, std::lround(options.dt_ctrl / options.dt_int));
  const double h = options.dt_ctrl / static_cast<double>(substeps);

  Trajectory traj;
  traj.status = SimulationStatus::HorizonReached;
  Eigen::VectorXd x = x0;

  for (long k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * options.dt_ctrl;
    ControlSample sample;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      sample = law(x, t);
    } catch (const std::exception & e) {
      traj.status = SimulationStatus::ControllerFailed;
      traj.failure_message = e.what();
      break;
    }
    const double latency = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (sample.u.size() != system.m() || !sample.u.allFinite()) {
      traj.status = SimulationStatus::ControllerFailed;
      traj.failure_message = "feedback law returned an invalid control";
      break;
    }

    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.controls.push_back(sample.u);
    traj.energies.push_back(sample.energy);
    traj.solve_times.push_back(latency);
    traj.stale.push_back(sample.stale);

    if (options.stop_tolerance > 0.0 && x.lpNorm<Eigen::Infinity>() < options.stop_tolerance) {
      traj.status = SimulationStatus::Converged;
      break;
    }
    if (k == steps) { break; }

    bool diverged = false;
    for (long j = 0; j < substeps; ++j) {
      x = rk4_step(system, x, sample.u, t + static_cast<double>(j) * h, h);
      if (!x.allFinite() || x.lpNorm<Eigen::Infinity>() > options.divergence_threshold) {
        diverged = true;
        break;
      }
    }
    if (diverged) {
      traj.status = SimulationStatus::Diverged;
      break;
    }
  }
  return traj;
}

Verdict stability_verdict(const Trajectory & trajectory, double ball_radius, double settle_fraction)
{
  if (trajectory.size() == 0) { throw std::invalid_argument("stability_verdict: empty trajectory"); }
  if (trajectory.status == SimulationStatus::Diverged || trajectory.status == SimulationStatus::ControllerFailed) {
    return Verdict::NotStabilized;
  }
  const double t_begin = trajectory.times.front();
  const double t_end = trajectory.times.back();
  const double t_settle = t_end - settle_fraction * (t_end - t_begin);
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    if (trajectory.times[k] + 1e-12 < t_settle) { continue; }
    if (!(trajectory.states[k].lpNorm<Eigen::Infinity>() < ball_radius)) { return Verdict::NotStabilized; }
  }
  return Verdict::Stabilized;
}

void write_csv(const Trajectory & trajectory, std::ostream & out)
{
  const Eigen::Index n = trajectory.states.empty() ? 0 : trajectory.states.front().size();
  const Eigen::Index m = trajectory.controls.empty() ? 0 : trajectory.controls.front().size();
  out << "t";
  for (Eigen::Index i = 1; i <= n; ++i) { out << ",x" << i; }
  for (Eigen::Index i = 1; i <= m; ++i) { out << ",u" << i; }
  out << ",energy,solve_time\n";

  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
  };
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    put(trajectory.times[k]);
    for (Eigen::Index i = 0; i < n; ++i) {
      out << ',';
      put(trajectory.states[k](i));
    }
    for (Eigen::Index i = 0; i < m; ++i) {
      out << ',';
      put(trajectory.controls[k](i));
    }
    out << ',';
    put(trajectory.energies[k]);
    out << ',';
    put(trajectory.solve_times[k]);
    out << '\n';
  }
}

}  // namespace ccm
