#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>

#include <Eigen/Core>
#include <Eigen/QR>

#include "ccm/metric.hpp"
#include "ccm/metric_io.hpp"

namespace ccm::test {

inline std::string fixture_path() { return std::string(CCM_DATA_DIR) + "/case_study_metric.json"; }

inline const Metric & fixture_metric()
{
  static const Metric m = load_metric(fixture_path());
  return m;
}

/// Seeded source of the random inputs used by property tests.
class Gen
{
public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  Eigen::VectorXd vector(int n, double lo, double hi)
  {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) { v(i) = uniform(lo, hi); }
    return v;
  }

  Eigen::VectorXd unit(int n)
  {
    Eigen::VectorXd v(n);
    std::normal_distribution<double> g;
    for (int i = 0; i < n; ++i) { v(i) = g(rng_); }
    return v.normalized();
  }

  /// Q diag(e) Q^T with eigenvalues in [lo, hi].
  Eigen::MatrixXd spd(int n, double lo = 0.5, double hi = 4.0)
  {
    Eigen::MatrixXd G(n, n);
    std::normal_distribution<double> g;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) G(i, j) = g(rng_);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
    const Eigen::MatrixXd Q = qr.householderQ();
    const Eigen::VectorXd e = vector(n, lo, hi);
    Eigen::MatrixXd S = Q * e.asDiagonal() * Q.transpose();
    return (S + S.transpose()) / 2;
  }

  std::mt19937_64 & engine() { return rng_; }

private:
  std::mt19937_64 rng_;
};

/// Composite Simpson rule with @p intervals (even) subintervals on [a, b].
inline double simpson(const std::function<double(double)> & f, double a, double b, int intervals)
{
  const double h = (b - a) / intervals;
  double sum = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) { sum += f(a + i * h) * (i % 2 ? 4.0 : 2.0); }
  return sum * h / 3.0;
}

/// T*_j(s) by the trigonometric definition, independent of the recurrence.
inline double shifted_chebyshev(int j, double s)
{
  const double x = 2.0 * s - 1.0;
  if (std::abs(x) <= 1.0) { return std::cos(j * std::acos(x)); }
  return std::cosh(j * std::acosh(std::abs(x))) * ((x < 0 && j % 2) ? -1.0 : 1.0);
}

inline double relative_error(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace ccm::test
