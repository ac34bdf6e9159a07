#pragma once

/**
 * @file
 * @brief Control-affine dynamics xdot = f(x, t) + B(x, t) u behind an evaluation interface.
 */

#include <functional>
#include <string>

#include <Eigen/Core>

namespace ccm {

class SystemModel
{
public:
  using Drift = std::function<Eigen::VectorXd(const Eigen::VectorXd &, double)>;
  using InputMatrix = std::function<Eigen::MatrixXd(const Eigen::VectorXd &, double)>;
  using Jacobian = std::function<Eigen::MatrixXd(const Eigen::VectorXd &, double)>;

  /// When no analytic Jacobian is given, A(x, t) falls back to central differences of f.
  SystemModel(std::string name, int n, int m, Drift f, InputMatrix B, Jacobian A = {});

  const std::string & name() const { return name_; }
  int n() const { return n_; }
  int m() const { return m_; }
  bool has_analytic_jacobian() const { return static_cast<bool>(A_); }

  Eigen::VectorXd drift(const Eigen::VectorXd & x, double t) const;
  Eigen::MatrixXd input_matrix(const Eigen::VectorXd & x, double t) const;
  Eigen::MatrixXd jacobian(const Eigen::VectorXd & x, double t) const;

  /// f(x, t) + B(x, t) u
  Eigen::VectorXd dynamics(const Eigen::VectorXd & x, const Eigen::VectorXd & u, double t) const;

private:
  void check_state(const Eigen::VectorXd & x) const;

  std::string name_;
  int n_;
  int m_;
  Drift f_;
  InputMatrix B_;
  Jacobian A_;
};

/**
 * @brief The stiff three-state benchmark
 *
 *   x1' = -x1 + x3
 *   x2' = x1^2 - x2 - 2 x1 x3 + x3
 *   x3' = -x2 + u
 */
SystemModel case_study_system();

/// x' = a x + b u (scalar), handy for tests and examples.
SystemModel scalar_linear_system(double a, double b);

}  // namespace ccm
