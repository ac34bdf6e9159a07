#include "ccm/lmi.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace ccm {

StateGrid StateGrid::box(int n, double lo, double hi, double step)
{
  if (n < 1 || !(step > 0.0) || hi < lo) { throw std::invalid_argument("StateGrid::box: invalid grid"); }
  const int per_axis = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
  StateGrid grid;
  std::ostringstream desc;
  desc << "box[" << lo << "," << hi << "]^" << n << " step " << step;
  grid.description = desc.str();

  std::vector<int> idx(n, 0);
  while (true) {
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) { x(i) = lo + step * idx[i]; }
    grid.points.push_back(std::move(x));
    int d = 0;
    while (d < n && ++idx[d] == per_axis) { idx[d++] = 0; }
    if (d == n) { break; }
  }
  return grid;
}

Eigen::MatrixXd lmi_residual(const Metric & metric, const SystemModel & system, const Eigen::VectorXd & x)
{
  if (metric.n() != system.n()) { throw std::invalid_argument("validate_lmi: metric and system dimensions differ"); }
  const Eigen::MatrixXd W = metric.eval_W(x);
  const Eigen::MatrixXd A = system.jacobian(x, 0.0);
  const Eigen::MatrixXd B = system.input_matrix(x, 0.0);
  const Eigen::VectorXd f = system.drift(x, 0.0);

  Eigen::MatrixXd W_dot = Eigen::MatrixXd::Zero(metric.n(), metric.n());
  for (int i = 0; i < metric.n(); ++i) {
    if (i == metric.var_index()) { W_dot += metric.dW_dx(x, i) * f(i); }
  }

  Eigen::MatrixXd R = -W_dot + W * A.transpose() + A * W - metric.rho(x) * B * B.transpose()
                      + 2.0 * metric.lambda() * W;
  return (R + R.transpose()) / 2.0;
}

LmiReport validate_lmi(const Metric & metric, const SystemModel & system, const StateGrid & grid)
{
  if (grid.points.empty()) { throw std::invalid_argument("validate_lmi: empty grid"); }
  LmiReport report;
  report.grid_description = grid.description;
  report.worst_eigenvalue = -std::numeric_limits<double>::infinity();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  for (const auto & x : grid.points) {
    es.compute(lmi_residual(metric, system, x), Eigen::EigenvaluesOnly);
    const double top = es.eigenvalues().maxCoeff();
    if (top > report.worst_eigenvalue || !std::isfinite(top)) {
      report.worst_eigenvalue = std::isfinite(top) ? top : std::numeric_limits<double>::infinity();
      report.worst_point = x;
    }
    ++report.points_checked;
  }
  report.pass = report.worst_eigenvalue < 0.0;
  return report;
}

}  // namespace ccm
