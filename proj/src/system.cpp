#include "ccm/system.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace ccm {

SystemModel::SystemModel(std::string name, int n, int m, Drift f, InputMatrix B, Jacobian A)
    : name_(std::move(name)), n_(n), m_(m), f_(std::move(f)), B_(std::move(B)), A_(std::move(A))
{
  if (n_ < 1 || m_ < 1) { throw std::invalid_argument("SystemModel: dimensions must be positive"); }
  if (!f_ || !B_) { throw std::invalid_argument("SystemModel: drift and input matrix are required"); }
}

void SystemModel::check_state(const Eigen::VectorXd & x) const
{
  if (x.size() != n_) {
    throw std::invalid_argument("SystemModel " + name_ + ": state has dimension " + std::to_string(x.size())
                                + ", expected " + std::to_string(n_));
  }
}

Eigen::VectorXd SystemModel::drift(const Eigen::VectorXd & x, double t) const
{
  check_state(x);
  return f_(x, t);
}

Eigen::MatrixXd SystemModel::input_matrix(const Eigen::VectorXd & x, double t) const
{
  check_state(x);
  return B_(x, t);
}

Eigen::MatrixXd SystemModel::jacobian(const Eigen::VectorXd & x, double t) const
{
  check_state(x);
  if (A_) { return A_(x, t); }
  Eigen::MatrixXd A(n_, n_);
  for (int j = 0; j < n_; ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(x(j)));
    Eigen::VectorXd xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    A.col(j) = (f_(xp, t) - f_(xm, t)) / (2.0 * h);
  }
  return A;
}

Eigen::VectorXd SystemModel::dynamics(const Eigen::VectorXd & x, const Eigen::VectorXd & u, double t) const
{
  check_state(x);
  if (u.size() != m_) { throw std::invalid_argument("SystemModel " + name_ + ": control dimension mismatch"); }
  return f_(x, t) + B_(x, t) * u;
}

SystemModel case_study_system()
{
  auto f = [](const Eigen::VectorXd & x, double) {
    Eigen::VectorXd dx(3);
    dx << -x(0) + x(2), x(0) * x(0) - x(1) - 2.0 * x(0) * x(2) + x(2), -x(1);
    return dx;
  };
  auto B = [](const Eigen::VectorXd &, double) {
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(3, 1);
    b(2, 0) = 1.0;
    return b;
  };
  auto A = [](const Eigen::VectorXd & x, double) {
    Eigen::MatrixXd a(3, 3);
    a << -1.0, 0.0, 1.0,
         2.0 * x(0) - 2.0 * x(2), -1.0, 1.0 - 2.0 * x(0),
         0.0, -1.0, 0.0;
    return a;
  };
  return SystemModel("case_study", 3, 1, f, B, A);
}

SystemModel scalar_linear_system(double a, double b)
{
  auto f = [a](const Eigen::VectorXd & x, double) { return Eigen::VectorXd::Constant(1, a * x(0)); };
  auto B = [b](const Eigen::VectorXd &, double) { return Eigen::MatrixXd::Constant(1, 1, b); };
  auto A = [a](const Eigen::VectorXd &, double) { return Eigen::MatrixXd::Constant(1, 1, a); };
  return SystemModel("scalar_linear", 1, 1, f, B, A);
}

}  // namespace ccm
