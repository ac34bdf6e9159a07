#include "ccm/controller.hpp"

#include <stdexcept>
#include <utility>

namespace ccm {

CcmController::CcmController(std::shared_ptr<const Metric> metric,
                             std::shared_ptr<const SystemModel> system,
                             SolverConfig config,
                             const std::optional<StateGrid> & lmi_grid,
                             Reference reference)
    : metric_(std::move(metric)), system_(std::move(system)), config_(config), reference_(std::move(reference))
{
  if (!metric_ || !system_) { throw std::invalid_argument("CcmController: metric and system are required"); }
  if (metric_->n() != system_->n()) { throw std::invalid_argument("CcmController: metric/system dimension mismatch"); }
  config_.validate();
  if (lmi_grid) {
    lmi_report_ = validate_lmi(*metric_, *system_, *lmi_grid);
    if (!lmi_report_->pass) {
      throw std::invalid_argument("CcmController: metric fails the contraction LMI (worst eigenvalue "
                                  + std::to_string(lmi_report_->worst_eigenvalue) + ")");
    }
  }
}

Eigen::VectorXd CcmController::control_from_geodesic(const GeodesicSolution<double> & geodesic, double t) const
{
  const int n = metric_->n();
  const int m = system_->m();
  Eigen::VectorXd u = reference_.input(t, m);
  if (geodesic.energy == 0.0) { return u; }

  const auto disc = cached_discretization<double>(geodesic.D, geodesic.N);
  const auto curve = eval_curve<double>(geodesic.c, n, disc->table);
  Eigen::VectorXd integral = Eigen::VectorXd::Zero(m);
  for (Eigen::Index k = 0; k < disc->grid.size(); ++k) {
    const Eigen::VectorXd x = curve.points.col(k);
    const Eigen::MatrixXd M = metric_->eval_M(x);
    const Eigen::MatrixXd B = system_->input_matrix(x, t);
    integral += disc->grid.weights(k) * metric_->rho(x) * (B.transpose() * (M * curve.tangents.col(k)));
  }
  return u - 0.5 * integral;
}

CcmControl CcmController::control(const Eigen::VectorXd & x, double t) const
{
  const int n = metric_->n();
  const Eigen::VectorXd x_star = reference_.state(t, n);
  const auto geodesic = solve_adaptive<double>(*metric_, x_star, x, config_);

  CcmControl out;
  out.u = control_from_geodesic(geodesic, t);
  out.energy = geodesic.energy;
  out.uniformity_error = geodesic.uniformity_error;
  out.converged = geodesic.converged;
  out.D = geodesic.D;
  out.iterations = geodesic.iterations;
  out.solve_time = geodesic.solve_time;
  return out;
}

double CcmController::energy_to_target(const Eigen::VectorXd & x, double t) const
{
  const Eigen::VectorXd x_star = reference_.state(t, metric_->n());
  return solve_adaptive<double>(*metric_, x_star, x, config_).energy;
}

FeedbackLaw make_feedback(std::shared_ptr<const CcmController> controller)
{
  if (!controller) { throw std::invalid_argument("make_feedback: null controller"); }
  auto last_good = std::make_shared<std::optional<Eigen::VectorXd>>();
  return [controller, last_good](const Eigen::VectorXd & x, double t) {
    const CcmControl c = controller->control(x, t);
    ControlSample out;
    out.energy = c.energy;
    if (c.converged) {
      out.u = c.u;
      *last_good = c.u;
    } else {
      out.stale = true;
      out.u = last_good->has_value() ? **last_good : c.u;
    }
    return out;
  };
}

}  // namespace ccm
