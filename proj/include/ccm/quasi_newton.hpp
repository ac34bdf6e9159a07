#pragma once

/**
 * @file
 * @brief Feasible BFGS for min f(x) s.t. A x = b with A constant.
 *
 * Each iteration solves the KKT system
 * \f[
 *   \begin{bmatrix} H & A^T \\ A & 0 \end{bmatrix}
 *   \begin{bmatrix} p \\ \nu \end{bmatrix} =
 *   \begin{bmatrix} -g \\ 0 \end{bmatrix},
 * \f]
 * backtracks along p until the Armijo condition holds and updates H with BFGS.
 * Steps lie in the nullspace of A, so a feasible start stays feasible.
 */

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/LU>
#include <Eigen/QR>

#include "basis.hpp"

namespace ccm {

struct QuasiNewtonOptions
{
  double beta{1e-10};    ///< projected-gradient tolerance, relative to |f| when |f| < 1
  double energy_tol{0};  ///< relative objective-change tolerance; 0 disables the test
  double alpha0{1.0};    ///< initial line-search step
  double cbar{0.1};      ///< Armijo constant
  double tau{0.1};       ///< backtracking factor
  int max_iter{500};
  int max_backtracks{20};
  double roundoff_factor{1000};  ///< width of the roundoff band of f, in ulps of |f|
  double wolfe_sigma{0.9};       ///< curvature constant of the approximate Wolfe test
};

template<typename Scalar>
struct QuasiNewtonResult
{
  VectorX<Scalar> x;
  Scalar f{0};
  int iterations{0};
  bool converged{false};
  Scalar projected_gradient_norm{0};
};

/// Raised when the KKT matrix (or A A^T) cannot be factorized.
class IllPosedProblemError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/**
 * @brief Minimizes f over {x : A x = A x0} starting from the feasible point x0.
 *
 * @param objective callable (const VectorX &, VectorX & grad) -> Scalar
 * @param on_iterate optional hook called with every accepted iterate and its value
 *
 * Terminates when the nullspace-projected gradient norm is <= beta * min(1, |f|), when no step along the
 * steepest feasible descent direction lowers f (flat to working precision), when an accepted
 * step changes f by <= energy_tol * max(1, |f|) (if enabled), or after max_iter iterations
 * (converged = false).
 */
template<typename Scalar, typename Objective>
QuasiNewtonResult<Scalar> minimize_equality_constrained(
  Objective && objective,
  const MatrixX<Scalar> & A,
  const VectorX<Scalar> & x0,
  const QuasiNewtonOptions & opts,
  const std::function<void(const VectorX<Scalar> &, Scalar)> & on_iterate = {})
{
  using Vector = VectorX<Scalar>;
  using Matrix = MatrixX<Scalar>;
  const Eigen::Index nv = x0.size();
  const Eigen::Index nc = A.rows();
  if (A.cols() != nv) { throw std::invalid_argument("minimize_equality_constrained: A has wrong column count"); }

  // Orthogonal projector onto null(A), used for the stationarity test.
  if (Eigen::ColPivHouseholderQR<Matrix>(A.transpose()).rank() < A.rows()) {
    throw IllPosedProblemError("constraint matrix does not have full row rank");
  }
  Eigen::LDLT<Matrix> aat(A * A.transpose());
  const Matrix projector = Matrix::Identity(nv, nv) - A.transpose() * aat.solve(A);

  QuasiNewtonResult<Scalar> res;
  res.x = x0;
  Vector g(nv), g_new(nv);
  res.f = objective(res.x, g);
  if (on_iterate) { on_iterate(res.x, res.f); }

  // The KKT right-hand side and the BFGS secant use projected gradients. Near the optimum g is
  // dominated by its row-space part A^T nu, which would otherwise swamp the nullspace part.
  Vector pg = projector * g;
  Vector pg_new(nv);

  Matrix H = Matrix::Identity(nv, nv);
  Matrix kkt = Matrix::Zero(nv + nc, nv + nc);
  kkt.topRightCorner(nv, nc) = A.transpose();
  kkt.bottomLeftCorner(nc, nv) = A;
  Vector rhs = Vector::Zero(nv + nc);

  for (; res.iterations < opts.max_iter; ++res.iterations) {
    res.projected_gradient_norm = pg.norm();
    if (res.projected_gradient_norm <= Scalar(opts.beta) * std::min(Scalar(1), std::abs(res.f))) {
      res.converged = true;
      return res;
    }

    kkt.topLeftCorner(nv, nv) = H;
    rhs.head(nv) = -pg;
    Eigen::PartialPivLU<Matrix> lu(kkt);
    if (!(lu.rcond() > Scalar(1e-15))) { throw IllPosedProblemError("singular KKT matrix"); }
    const Vector p = projector * lu.solve(rhs).head(nv);

    const Scalar slope = pg.dot(p);
    if (!(slope < Scalar(0))) {
      // Not a descent direction: H lost positive curvature on the nullspace. Restart from identity.
      if (H.isIdentity()) { break; }
      H.setIdentity();
      continue;
    }

    // Armijo backtracking. Near the optimum f changes only at roundoff level, so a step within
    // the roundoff band of f is also accepted if it meets the approximate Wolfe conditions.
    const Scalar f_noise = Scalar(opts.roundoff_factor) * std::numeric_limits<Scalar>::epsilon() * std::abs(res.f);
    Scalar alpha = Scalar(opts.alpha0);
    Vector x_new(nv);
    Scalar f_new = 0;
    bool accepted = false;
    for (int bt = 0; bt <= opts.max_backtracks; ++bt, alpha *= Scalar(opts.tau)) {
      x_new = res.x + alpha * p;
      f_new = objective(x_new, g_new);
      if (!std::isfinite(f_new)) { continue; }
      pg_new = projector * g_new;
      const Scalar predicted = -Scalar(opts.cbar) * alpha * slope;
      if (predicted > f_noise && f_new <= res.f - predicted) {
        accepted = true;
        break;
      }
      const Scalar dphi = pg_new.dot(p);
      if (f_new <= res.f + f_noise && dphi >= Scalar(opts.wolfe_sigma) * slope
          && dphi <= (Scalar(2) * Scalar(opts.cbar) - Scalar(1)) * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (!H.isIdentity()) {
        H.setIdentity();
        continue;
      }
      // No measurable progress along the steepest feasible descent: flat to working precision.
      res.converged = true;
      return res;
    }

    const Vector s = x_new - res.x;
    const Vector y = pg_new - pg;
    const Scalar df = res.f - f_new;
    res.x = x_new;
    res.f = f_new;
    g = g_new;
    pg = pg_new;
    if (on_iterate) { on_iterate(res.x, res.f); }

    const Scalar sy = s.dot(y);
    if (sy > Scalar(1e-10) * s.norm() * y.norm()) {
      const Vector Hs = H * s;
      H += (y * y.transpose()) / sy - (Hs * Hs.transpose()) / s.dot(Hs);
    }

    if (opts.energy_tol > 0 && std::abs(df) <= Scalar(opts.energy_tol) * std::max(Scalar(1), std::abs(res.f))) {
      res.converged = true;
      ++res.iterations;
      res.projected_gradient_norm = pg.norm();
      return res;
    }
  }
  res.projected_gradient_norm = pg.norm();
  return res;
}

}  // namespace ccm
