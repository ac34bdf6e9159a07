#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "metric.hpp"
#include "system.hpp"

namespace ccm {

/// Pointwise certificate of the dual contraction LMI over a finite set of states.
struct LmiReport
{
  std::string grid_description;
  std::size_t points_checked{0};
  double worst_eigenvalue{0.0};
  Eigen::VectorXd worst_point;
  bool pass{false};
};

/// A finite list of states plus a human-readable description.
struct StateGrid
{
  std::string description;
  std::vector<Eigen::VectorXd> points;

  /// Tensor grid lo, lo+step, ..., hi in each of n coordinates.
  static StateGrid box(int n, double lo, double hi, double step);
};

/**
 * @brief Evaluates R(x) = -Wdot + W A^T + A W - rho B B^T + 2 lambda W at each grid point
 * and reports the largest eigenvalue found. Wdot = sum_i (dW/dx_i) f_i(x) (drift only).
 *
 * Passes iff that largest eigenvalue is strictly negative.
 */
LmiReport validate_lmi(const Metric & metric, const SystemModel & system, const StateGrid & grid);

/// The residual matrix R(x) at one state.
Eigen::MatrixXd lmi_residual(const Metric & metric, const SystemModel & system, const Eigen::VectorXd & x);

}  // namespace ccm
