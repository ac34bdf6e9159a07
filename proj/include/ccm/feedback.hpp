#pragma once

#include <functional>
#include <limits>

#include <Eigen/Core>

namespace ccm {

/// Nominal pair (x*(t), u*(t)). Empty functions mean regulation to the origin with u* = 0.
struct Reference
{
  std::function<Eigen::VectorXd(double)> x_star;
  std::function<Eigen::VectorXd(double)> u_star;

  Eigen::VectorXd state(double t, int n) const { return x_star ? x_star(t) : Eigen::VectorXd::Zero(n); }
  Eigen::VectorXd input(double t, int m) const { return u_star ? u_star(t) : Eigen::VectorXd::Zero(m); }
};

/// One evaluation of a feedback law inside the control loop.
struct ControlSample
{
  Eigen::VectorXd u;
  double energy{std::numeric_limits<double>::quiet_NaN()};  ///< geodesic energy, NaN when not applicable
  bool stale{false};  ///< u is a held previous value because the fresh solve failed
};

using FeedbackLaw = std::function<ControlSample(const Eigen::VectorXd & x, double t)>;

}  // namespace ccm
