#pragma once

/**
 * @file
 * @brief CCM feedback: integrate the differential controller along the minimal geodesic
 * from x*(t) to x,
 * \f[ u = u^*(t) - \tfrac12 \int_0^1 \rho(\gamma(s)) B(\gamma(s), t)^T M(\gamma(s)) \gamma_s(s)\, ds, \f]
 * with the integral taken by the same Clenshaw-Curtis rule as the accepted geodesic.
 */

#include <memory>
#include <optional>

#include <Eigen/Core>

#include "feedback.hpp"
#include "geodesic.hpp"
#include "lmi.hpp"
#include "lqr.hpp"
#include "metric.hpp"
#include "system.hpp"

namespace ccm {

struct CcmControl
{
  Eigen::VectorXd u;
  double energy{0.0};          ///< E* of the geodesic, the Riemannian energy to the target
  double uniformity_error{0.0};
  bool converged{false};
  int D{0};
  int iterations{0};
  double solve_time{0.0};
};

class CcmController
{
public:
  /**
   * @param lmi_grid states on which the metric must pass validate_lmi; std::nullopt skips the
   *        check and marks the controller as overridden.
   * @throws std::invalid_argument if the metric fails the LMI on lmi_grid.
   */
  CcmController(std::shared_ptr<const Metric> metric,
                std::shared_ptr<const SystemModel> system,
                SolverConfig config,
                const std::optional<StateGrid> & lmi_grid,
                Reference reference = {});

  CcmControl control(const Eigen::VectorXd & x, double t) const;

  double energy_to_target(const Eigen::VectorXd & x, double t) const;

  /// u*(t) - 1/2 sum_k w_k rho B^T M gamma_s for an already solved geodesic.
  Eigen::VectorXd control_from_geodesic(const GeodesicSolution<double> & geodesic, double t) const;

  const Metric & metric() const { return *metric_; }
  const SystemModel & system() const { return *system_; }
  const SolverConfig & config() const { return config_; }
  const Reference & reference() const { return reference_; }

  bool lmi_overridden() const { return !lmi_report_.has_value(); }
  const std::optional<LmiReport> & lmi_report() const { return lmi_report_; }

private:
  std::shared_ptr<const Metric> metric_;
  std::shared_ptr<const SystemModel> system_;
  SolverConfig config_;
  Reference reference_;
  std::optional<LmiReport> lmi_report_;
};

/**
 * @brief Wraps a CCM controller for the control loop.
 *
 * When a geodesic solve does not converge, the last successfully computed control is held
 * and the sample is flagged stale.
 */
FeedbackLaw make_feedback(std::shared_ptr<const CcmController> controller);

}  // namespace ccm
