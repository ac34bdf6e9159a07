#pragma once

/**
 * @file
 * @brief Minimal geodesics of a polynomial metric by Chebyshev pseudospectral optimization.
 *
 * The curve is gamma_i(s) = sum_j c_ij T*_j(s) on [0, 1]. Its energy is approximated with
 * Clenshaw-Curtis quadrature on N + 1 CGL nodes (N > D), the endpoint conditions are linear
 * in c, and the resulting problem is solved with feasible BFGS (see quasi_newton.hpp).
 */

#include <array>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "basis.hpp"
#include "metric.hpp"
#include "quasi_newton.hpp"

namespace ccm {

struct SolverConfig
{
  double beta{1e-10};
  double energy_tol{0.0};  ///< relative energy-change stop, 0 disables
  double alpha0{1.0};
  double cbar{0.1};
  double tau{0.1};
  int max_iter{500};
  double uniformity_tol{1e-6};
  int D_min{3};
  int D_max{30};
  int a{4};  ///< node surplus, N = D + a

  void validate() const
  {
    if (!(cbar > 0.0 && cbar < 1.0)) { throw std::invalid_argument("SolverConfig: cbar must lie in (0, 1)"); }
    if (!(tau > 0.0 && tau < 1.0)) { throw std::invalid_argument("SolverConfig: tau must lie in (0, 1)"); }
    if (!(energy_tol >= 0.0)) { throw std::invalid_argument("SolverConfig: energy_tol must be non-negative"); }
    if (!(beta > 0.0) || !(alpha0 > 0.0)) { throw std::invalid_argument("SolverConfig: beta and alpha0 must be positive"); }
    if (max_iter < 1) { throw std::invalid_argument("SolverConfig: max_iter must be positive"); }
    if (D_min < 1 || D_max < D_min) { throw std::invalid_argument("SolverConfig: need 1 <= D_min <= D_max"); }
    if (a < 1) { throw std::invalid_argument("SolverConfig: node surplus a must be >= 1"); }
    if (!(uniformity_tol > 0.0)) { throw std::invalid_argument("SolverConfig: uniformity_tol must be positive"); }
  }

  QuasiNewtonOptions quasi_newton() const
  {
    QuasiNewtonOptions o;
    o.beta = beta;
    o.energy_tol = energy_tol;
    o.alpha0 = alpha0;
    o.cbar = cbar;
    o.tau = tau;
    o.max_iter = max_iter;
    return o;
  }
};

/// gamma(0) = x_start (the target x*), gamma(1) = x_end (the current state).
template<typename Scalar = double>
class GeodesicProblem
{
public:
  GeodesicProblem(const PolynomialMetric<Scalar> & metric, VectorX<Scalar> x_start, VectorX<Scalar> x_end, int D, int N)
      : metric_(&metric), x_start_(std::move(x_start)), x_end_(std::move(x_end)), D_(D), N_(N)
  {
    if (x_start_.size() != metric.n() || x_end_.size() != metric.n()) {
      throw std::invalid_argument("GeodesicProblem: endpoint dimension does not match metric");
    }
    if (!x_start_.allFinite() || !x_end_.allFinite()) { throw std::invalid_argument("GeodesicProblem: non-finite endpoint"); }
    if (D_ < 1) { throw std::invalid_argument("GeodesicProblem: D must be >= 1"); }
    if (N_ <= D_) {
      throw std::invalid_argument("GeodesicProblem: need N > D (got D=" + std::to_string(D_) + ", N=" + std::to_string(N_)
                                  + ")");
    }
  }

  const PolynomialMetric<Scalar> & metric() const { return *metric_; }
  const VectorX<Scalar> & x_start() const { return x_start_; }
  const VectorX<Scalar> & x_end() const { return x_end_; }
  int D() const { return D_; }
  int N() const { return N_; }
  int n() const { return metric_->n(); }
  Eigen::Index num_coefficients() const { return static_cast<Eigen::Index>(n()) * (D_ + 1); }

  std::shared_ptr<const Discretization<Scalar>> discretization() const { return cached_discretization<Scalar>(D_, N_); }

private:
  const PolynomialMetric<Scalar> * metric_;
  VectorX<Scalar> x_start_;
  VectorX<Scalar> x_end_;
  int D_;
  int N_;
};

struct DegreeAttempt
{
  int D{0};
  int N{0};
  double uniformity_error{0.0};
  int iterations{0};
  bool converged{false};
};

template<typename Scalar = double>
struct GeodesicSolution
{
  VectorX<Scalar> c;
  Scalar energy{0};
  Scalar uniformity_error{0};
  int iterations{0};
  double solve_time{0.0};  ///< seconds
  bool converged{false};
  int D{0};
  int N{0};
  std::vector<DegreeAttempt> attempts;  ///< filled by solve_adaptive
};

/// Rows 0..n-1: sum_j c_ij (-1)^j = x_start_i; rows n..2n-1: sum_j c_ij = x_end_i.
template<typename Scalar>
std::pair<MatrixX<Scalar>, VectorX<Scalar>> endpoint_constraints(const GeodesicProblem<Scalar> & problem)
{
  const int n = problem.n();
  const int D = problem.D();
  MatrixX<Scalar> A = MatrixX<Scalar>::Zero(2 * n, problem.num_coefficients());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= D; ++j) {
      A(i, i * (D + 1) + j) = (j % 2 == 0) ? Scalar(1) : Scalar(-1);
      A(n + i, i * (D + 1) + j) = Scalar(1);
    }
  }
  VectorX<Scalar> b(2 * n);
  b << problem.x_start(), problem.x_end();
  return {std::move(A), std::move(b)};
}

/// E(c) and its gradient. The gradient of each node term is
/// 2 (M gamma_s)_i dT*_j/ds - gamma_s^T M (dW/dx_i) M gamma_s T*_j, weighted by w_k.
template<typename Scalar>
Scalar energy_and_gradient(const Eigen::Ref<const VectorX<Scalar>> & c,
                           const GeodesicProblem<Scalar> & problem,
                           const Discretization<Scalar> & disc,
                           VectorX<Scalar> * gradient)
{
  const int n = problem.n();
  const int D = problem.D();
  if (disc.D != D) { throw std::invalid_argument("energy: discretization degree does not match problem"); }
  const auto & metric = problem.metric();
  const auto curve = eval_curve<Scalar>(c, n, disc.table);
  const int v = metric.var_index();

  using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  RowMatrix G;
  if (gradient) { G = RowMatrix::Zero(n, D + 1); }

  Scalar E = 0;
  for (Eigen::Index k = 0; k < disc.grid.size(); ++k) {
    const auto x = curve.points.col(k);
    const auto xs = curve.tangents.col(k);
    const MatrixX<Scalar> M = metric.eval_M(x);
    const VectorX<Scalar> Mg = M * xs;
    const Scalar wk = disc.grid.weights(k);
    E += wk * xs.dot(Mg);
    if (gradient) {
      G.noalias() += (Scalar(2) * wk) * Mg * disc.table.derivs.row(k);
      const Scalar curvature = Mg.dot(metric.dW_dx(x, v) * Mg);
      G.row(v) -= (wk * curvature) * disc.table.values.row(k);
    }
  }
  if (gradient) { *gradient = Eigen::Map<const VectorX<Scalar>>(G.data(), G.size()); }
  return E;
}

template<typename Scalar>
Scalar energy(const Eigen::Ref<const VectorX<Scalar>> & c,
              const GeodesicProblem<Scalar> & problem,
              const Discretization<Scalar> & disc)
{
  return energy_and_gradient<Scalar>(c, problem, disc, nullptr);
}

template<typename Scalar>
VectorX<Scalar> energy_gradient(const Eigen::Ref<const VectorX<Scalar>> & c,
                                const GeodesicProblem<Scalar> & problem,
                                const Discretization<Scalar> & disc)
{
  VectorX<Scalar> g;
  energy_and_gradient<Scalar>(c, problem, disc, &g);
  return g;
}

/// sqrt(sum_k w_k (e_k - E)^2) / E, or 0 when E = 0.
template<typename Scalar>
Scalar relative_rms_deviation(const Eigen::Ref<const VectorX<Scalar>> & e,
                              const Eigen::Ref<const VectorX<Scalar>> & weights,
                              Scalar E)
{
  if (e.size() != weights.size()) { throw std::invalid_argument("relative_rms_deviation: size mismatch"); }
  if (E == Scalar(0)) { return Scalar(0); }
  const Scalar ss = (weights.array() * (e.array() - E).square()).sum();
  return std::sqrt(std::max(ss, Scalar(0))) / std::abs(E);
}

/// Speed profile e(s_k) of the curve on a CGL grid of the given size.
template<typename Scalar>
VectorX<Scalar> speed_profile(const Eigen::Ref<const VectorX<Scalar>> & c,
                              const GeodesicProblem<Scalar> & problem,
                              const Discretization<Scalar> & disc)
{
  const auto curve = eval_curve<Scalar>(c, problem.n(), disc.table);
  VectorX<Scalar> e(disc.grid.size());
  for (Eigen::Index k = 0; k < e.size(); ++k) {
    e(k) = problem.metric().energy_integrand(curve.points.col(k), curve.tangents.col(k));
  }
  return e;
}

/// Uniformity error of a solved curve, measured on a validation grid with 2N nodes.
template<typename Scalar>
Scalar uniformity_error(const GeodesicSolution<Scalar> & solution, const GeodesicProblem<Scalar> & problem)
{
  if (solution.energy == Scalar(0)) { return Scalar(0); }
  const auto val = cached_discretization<Scalar>(problem.D(), 2 * problem.N());
  const VectorX<Scalar> e = speed_profile<Scalar>(solution.c, problem, *val);
  return relative_rms_deviation<Scalar>(e, val->grid.weights, solution.energy);
}

/// Projects c onto {A c = b} in the least-squares sense.
template<typename Scalar>
VectorX<Scalar> project_onto_constraints(const VectorX<Scalar> & c, const MatrixX<Scalar> & A, const VectorX<Scalar> & b)
{
  const MatrixX<Scalar> AAt = A * A.transpose();
  return c - A.transpose() * AAt.ldlt().solve(A * c - b);
}

/**
 * @brief Solves one fixed-(D, N) geodesic problem.
 *
 * Starts from @p initial when given (projected onto the endpoint constraints), else from the
 * straight line. Equal endpoints return the constant curve with zero energy.
 */
template<typename Scalar>
GeodesicSolution<Scalar> solve_geodesic(const GeodesicProblem<Scalar> & problem,
                                        const SolverConfig & config,
                                        const VectorX<Scalar> * initial = nullptr,
                                        const std::function<void(const VectorX<Scalar> &, Scalar)> & on_iterate = {})
{
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  GeodesicSolution<Scalar> sol;
  sol.D = problem.D();
  sol.N = problem.N();

  if (problem.x_start() == problem.x_end()) {
    sol.c = straight_line_coefficients<Scalar>(problem.x_start(), problem.x_end(), problem.D());
    sol.energy = 0;
    sol.uniformity_error = 0;
    sol.converged = true;
    sol.solve_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return sol;
  }

  const auto disc = problem.discretization();
  auto [A, b] = endpoint_constraints(problem);
  VectorX<Scalar> c0 = straight_line_coefficients<Scalar>(problem.x_start(), problem.x_end(), problem.D());
  if (initial) {
    if (initial->size() != problem.num_coefficients()) {
      throw std::invalid_argument("solve_geodesic: initial guess has wrong size");
    }
    c0 = project_onto_constraints<Scalar>(*initial, A, b);
  }

  auto objective = [&](const VectorX<Scalar> & c, VectorX<Scalar> & g) {
    try {
      return energy_and_gradient<Scalar>(c, problem, *disc, &g);
    } catch (const SingularMetricError &) {
      return std::numeric_limits<Scalar>::infinity();
    }
  };
  auto qn = minimize_equality_constrained<Scalar>(objective, A, c0, config.quasi_newton(), on_iterate);

  sol.c = std::move(qn.x);
  sol.energy = qn.f;
  sol.iterations = qn.iterations;
  sol.converged = qn.converged;
  sol.solve_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  sol.uniformity_error = uniformity_error(sol, problem);
  return sol;
}

/**
 * @brief Raises D from D_min until the uniformity error drops below the tolerance.
 *
 * Uses N = D + a. Each degree is warm-started from the previous coefficients (zero padded).
 * If D_max is reached without acceptance, the lowest-error attempt is returned with
 * converged = false.
 */
template<typename Scalar>
GeodesicSolution<Scalar> solve_adaptive(const PolynomialMetric<Scalar> & metric,
                                        const VectorX<Scalar> & x_start,
                                        const VectorX<Scalar> & x_end,
                                        const SolverConfig & config)
{
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();

  GeodesicSolution<Scalar> best;
  best.uniformity_error = std::numeric_limits<Scalar>::infinity();
  std::vector<DegreeAttempt> attempts;
  VectorX<Scalar> warm;
  int total_iterations = 0;

  for (int D = config.D_min; D <= config.D_max; ++D) {
    const GeodesicProblem<Scalar> problem(metric, x_start, x_end, D, D + config.a);
    VectorX<Scalar> init;
    if (warm.size() > 0) { init = resize_coefficients<Scalar>(warm, metric.n(), D - 1, D); }
    auto sol = solve_geodesic(problem, config, warm.size() > 0 ? &init : nullptr);
    total_iterations += sol.iterations;
    attempts.push_back({D, problem.N(), static_cast<double>(sol.uniformity_error), sol.iterations, sol.converged});
    warm = sol.c;

    const bool accepted = sol.converged && sol.uniformity_error < Scalar(config.uniformity_tol);
    if (accepted || sol.uniformity_error < best.uniformity_error) {
      best = std::move(sol);
      best.converged = accepted;
    }
    if (accepted) { break; }
  }

  best.iterations = total_iterations;
  best.attempts = std::move(attempts);
  best.solve_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return best;
}

/// Path of a transcribed (shooting) solution: column k is the state at s = k / segments.
template<typename Scalar = double>
struct ShootingSolution
{
  MatrixX<Scalar> path;
  Scalar energy{0};
  Scalar uniformity_error{0};
  int iterations{0};
  double solve_time{0.0};
  bool converged{false};
};

/**
 * @brief Geodesic as an optimal control problem x' = u, J = int u^T M(x) u ds.
 *
 * Direct transcription on uniform segments: u is constant and x linear on each segment; the
 * segment integrals use 3-point Gauss-Legendre quadrature. Decision variables are the node
 * states; the endpoints are linear equality constraints handled by the same feasible BFGS.
 */
template<typename Scalar>
ShootingSolution<Scalar> shooting_baseline(const PolynomialMetric<Scalar> & metric,
                                           const VectorX<Scalar> & x_start,
                                           const VectorX<Scalar> & x_end,
                                           int segments,
                                           const SolverConfig & config,
                                           int max_iter = 5000)
{
  config.validate();
  if (segments < 2) { throw std::invalid_argument("shooting_baseline: need at least 2 segments"); }
  const int n = metric.n();
  if (x_start.size() != n || x_end.size() != n) { throw std::invalid_argument("shooting_baseline: endpoint size"); }
  const auto t0 = std::chrono::steady_clock::now();
  const int K = segments;
  const Scalar h = Scalar(1) / Scalar(K);
  const int v = metric.var_index();

  // Gauss-Legendre on [0, 1].
  const Scalar r = std::sqrt(Scalar(3) / Scalar(5)) / Scalar(2);
  const std::array<Scalar, 3> tq{Scalar(0.5) - r, Scalar(0.5), Scalar(0.5) + r};
  const std::array<Scalar, 3> wq{Scalar(5) / Scalar(18), Scalar(8) / Scalar(18), Scalar(5) / Scalar(18)};

  const Eigen::Index nv = static_cast<Eigen::Index>(n) * (K + 1);
  MatrixX<Scalar> A = MatrixX<Scalar>::Zero(2 * n, nv);
  for (int i = 0; i < n; ++i) {
    A(i, i) = 1;
    A(n + i, static_cast<Eigen::Index>(K) * n + i) = 1;
  }

  VectorX<Scalar> x0(nv);
  for (int k = 0; k <= K; ++k) { x0.segment(k * n, n) = x_start + (x_end - x_start) * (Scalar(k) / Scalar(K)); }

  auto objective = [&](const VectorX<Scalar> & z, VectorX<Scalar> & g) -> Scalar {
    g.setZero(nv);
    Scalar J = 0;
    for (int k = 0; k < K; ++k) {
      const auto xa = z.segment(k * n, n);
      const auto xb = z.segment((k + 1) * n, n);
      const VectorX<Scalar> u = (xb - xa) / h;
      for (int q = 0; q < 3; ++q) {
        const VectorX<Scalar> x = (Scalar(1) - tq[q]) * xa + tq[q] * xb;
        const MatrixX<Scalar> M = metric.eval_M(x);
        const VectorX<Scalar> Mu = M * u;
        const Scalar hw = h * wq[q];
        J += hw * u.dot(Mu);
        const Scalar curv = -Mu.dot(metric.dW_dx(x, v) * Mu);
        g.segment((k + 1) * n, n) += hw * (Scalar(2) / h) * Mu;
        g.segment(k * n, n) -= hw * (Scalar(2) / h) * Mu;
        g((k + 1) * n + v) += hw * tq[q] * curv;
        g(k * n + v) += hw * (Scalar(1) - tq[q]) * curv;
      }
    }
    return J;
  };

  auto guarded = [&](const VectorX<Scalar> & z, VectorX<Scalar> & g) -> Scalar {
    try {
      return objective(z, g);
    } catch (const SingularMetricError &) {
      return std::numeric_limits<Scalar>::infinity();
    }
  };

  QuasiNewtonOptions opts = config.quasi_newton();
  opts.max_iter = max_iter;
  auto qn = minimize_equality_constrained<Scalar>(guarded, A, x0, opts);

  ShootingSolution<Scalar> sol;
  sol.path = Eigen::Map<const MatrixX<Scalar>>(qn.x.data(), n, K + 1);
  sol.energy = qn.f;
  sol.iterations = qn.iterations;
  sol.converged = qn.converged;

  // Speed profile at the same quadrature points the objective uses.
  VectorX<Scalar> e(3 * K), w(3 * K);
  for (int k = 0; k < K; ++k) {
    const VectorX<Scalar> xa = sol.path.col(k), xb = sol.path.col(k + 1);
    const VectorX<Scalar> u = (xb - xa) / h;
    for (int q = 0; q < 3; ++q) {
      e(3 * k + q) = metric.energy_integrand((Scalar(1) - tq[q]) * xa + tq[q] * xb, u);
      w(3 * k + q) = h * wq[q];
    }
  }
  sol.uniformity_error = relative_rms_deviation<Scalar>(e, w, sol.energy);
  sol.solve_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return sol;
}

}  // namespace ccm
