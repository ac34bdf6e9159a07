#pragma once

/**
 * @file
 * @brief Sampled-data closed-loop simulation: the feedback law is evaluated at every control
 * instant, held constant (zero-order hold) and the plant is integrated with fixed-step RK4.
 */

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "feedback.hpp"
#include "system.hpp"

namespace ccm {

enum class SimulationStatus { HorizonReached, Converged, Diverged, ControllerFailed };

std::string to_string(SimulationStatus status);

struct SimulationOptions
{
  double horizon{15.0};
  double dt_ctrl{1e-3};
  double dt_int{1e-4};
  double divergence_threshold{1e6};  ///< infinity norm
  double stop_tolerance{0.0};        ///< if > 0, stop early once ||x||_inf falls below it

  void validate() const;
};

/// One row per control instant.
struct Trajectory
{
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  std::vector<Eigen::VectorXd> controls;
  std::vector<double> energies;     ///< NaN for laws without a geodesic
  std::vector<double> solve_times;  ///< controller wall-clock latency, seconds
  std::vector<bool> stale;
  SimulationStatus status{SimulationStatus::HorizonReached};
  std::string failure_message;

  std::size_t size() const { return times.size(); }
  double mean_solve_time() const;
  double max_solve_time() const;
};

/// One classical RK4 step of x' = system.dynamics(x, u, t) with u held.
Eigen::VectorXd rk4_step(const SystemModel & system, const Eigen::VectorXd & x, const Eigen::VectorXd & u, double t,
                         double h);

Trajectory simulate(const SystemModel & system, const FeedbackLaw & law, const Eigen::VectorXd & x0,
                    const SimulationOptions & options);

enum class Verdict { Stabilized, NotStabilized };

std::string to_string(Verdict verdict);

/// Stabilized iff not diverged and ||x(t)||_inf < ball_radius over the final settle_fraction of the run.
Verdict stability_verdict(const Trajectory & trajectory, double ball_radius = 0.05, double settle_fraction = 0.25);

/// CSV with header t,x1..xn,u1..um,energy,solve_time.
void write_csv(const Trajectory & trajectory, std::ostream & out);

}  // namespace ccm
