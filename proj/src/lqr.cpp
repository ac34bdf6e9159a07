#include "ccm/lqr.hpp"

#include <cmath>
#include <complex>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>

namespace ccm {

namespace {

void check_shapes(const Eigen::MatrixXd & A, const Eigen::MatrixXd & B, const Eigen::MatrixXd & Q,
                  const Eigen::MatrixXd & R)
{
  const auto n = A.rows();
  if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n || R.rows() != B.cols()
      || R.cols() != B.cols()) {
    throw LqrDesignError("lqr: inconsistent matrix dimensions");
  }
  if (Eigen::LLT<Eigen::MatrixXd>(R).info() != Eigen::Success) { throw LqrDesignError("lqr: R must be positive definite"); }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> qs(Q);
  if (qs.eigenvalues().minCoeff() < -1e-12) { throw LqrDesignError("lqr: Q must be positive semidefinite"); }
}

/// Solves Ac^T X + X Ac + C = 0 through the Kronecker form (small n only).
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd & Ac, const Eigen::MatrixXd & C)
{
  const auto n = Ac.rows();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n * n, n * n);
  // vec(Ac^T X) = (I kron Ac^T) vec(X), vec(X Ac) = (Ac^T kron I) vec(X)
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      L.block(i * n, j * n, n, n) += I(i, j) * Ac.transpose();
      L.block(i * n, j * n, n, n) += Ac(j, i) * I;
    }
  }
  const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(C.data(), n * n);
  Eigen::VectorXd x = L.fullPivLu().solve(rhs);
  Eigen::MatrixXd X = Eigen::Map<Eigen::MatrixXd>(x.data(), n, n);
  return (X + X.transpose()) / 2.0;
}

}  // namespace

bool is_hurwitz(const Eigen::MatrixXd & A)
{
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
  return (es.eigenvalues().real().array() < 0.0).all();
}

bool is_stabilizable(const Eigen::MatrixXd & A, const Eigen::MatrixXd & B)
{
  using CMatrix = Eigen::MatrixXcd;
  const auto n = A.rows();
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
  for (Eigen::Index k = 0; k < n; ++k) {
    const std::complex<double> lambda = es.eigenvalues()(k);
    if (lambda.real() < 0.0) { continue; }
    CMatrix pbh(n, n + B.cols());
    pbh.leftCols(n) = A.cast<std::complex<double>>() - lambda * CMatrix::Identity(n, n);
    pbh.rightCols(B.cols()) = B.cast<std::complex<double>>();
    Eigen::FullPivLU<CMatrix> lu(pbh);
    lu.setThreshold(1e-10);
    if (lu.rank() < n) { return false; }
  }
  return true;
}

double care_residual(const Eigen::MatrixXd & A, const Eigen::MatrixXd & B, const Eigen::MatrixXd & Q,
                     const Eigen::MatrixXd & R, const Eigen::MatrixXd & P)
{
  const Eigen::MatrixXd res =
    A.transpose() * P + P * A - P * B * R.llt().solve(B.transpose()) * P + Q;
  return res.norm();
}

Eigen::MatrixXd solve_care(const Eigen::MatrixXd & A, const Eigen::MatrixXd & B, const Eigen::MatrixXd & Q,
                           const Eigen::MatrixXd & R)
{
  check_shapes(A, B, Q, R);
  if (!is_stabilizable(A, B)) { throw LqrDesignError("lqr: (A, B) is not stabilizable"); }
  const auto n = A.rows();
  const Eigen::MatrixXd S = B * R.llt().solve(B.transpose());

  Eigen::MatrixXd Z(2 * n, 2 * n);
  Z << A, -S, -Q, -A.transpose();

  // Matrix sign function with determinant scaling.
  bool converged = false;
  for (int it = 0; it < 100; ++it) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(Z);
    const double det = std::abs(lu.determinant());
    if (!(det > 0.0) || !std::isfinite(det)) {
      throw LqrDesignError("lqr: Hamiltonian has eigenvalues on the imaginary axis");
    }
    const double c = std::pow(det, 1.0 / static_cast<double>(2 * n));
    const Eigen::MatrixXd Znext = 0.5 * (Z / c + c * lu.inverse());
    const double change = (Znext - Z).norm();
    Z = Znext;
    if (change <= 1e-13 * Z.norm()) {
      converged = true;
      break;
    }
  }
  if (!converged) { throw LqrDesignError("lqr: matrix sign iteration did not converge"); }

  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd lhs(2 * n, n), rhs(2 * n, n);
  lhs << Z.topRightCorner(n, n), Z.bottomRightCorner(n, n) + I;
  rhs << Z.topLeftCorner(n, n) + I, Z.bottomLeftCorner(n, n);
  Eigen::MatrixXd P = lhs.colPivHouseholderQr().solve(-rhs);
  P = (P + P.transpose()) / 2.0;

  // Newton-Kleinman polish.
  for (int it = 0; it < 3 && care_residual(A, B, Q, R, P) > 1e-13 * std::max(1.0, P.norm()); ++it) {
    const Eigen::MatrixXd K = R.llt().solve(B.transpose() * P);
    const Eigen::MatrixXd Ac = A - B * K;
    if (!is_hurwitz(Ac)) { break; }
    P = solve_lyapunov(Ac, Q + K.transpose() * R * K);
  }

  if (Eigen::LLT<Eigen::MatrixXd>(P).info() != Eigen::Success) {
    throw LqrDesignError("lqr: Riccati solution is not positive definite");
  }
  const double resid = care_residual(A, B, Q, R, P);
  if (!(resid < 1e-8)) { throw LqrDesignError("lqr: Riccati residual " + std::to_string(resid) + " too large"); }
  return P;
}

LqrController lqr_design(const Eigen::MatrixXd & A, const Eigen::MatrixXd & B, const Eigen::MatrixXd & Q,
                         const Eigen::MatrixXd & R, Reference reference)
{
  LqrController c;
  c.A = A;
  c.B = B;
  c.Q = Q;
  c.R = R;
  c.P = solve_care(A, B, Q, R);
  c.K = R.llt().solve(B.transpose() * c.P);
  if (!is_hurwitz(A - B * c.K)) { throw LqrDesignError("lqr: closed loop A - B K is not Hurwitz"); }
  c.reference = std::move(reference);
  return c;
}

Eigen::VectorXd LqrController::control(const Eigen::VectorXd & x, double t) const
{
  const auto n = static_cast<int>(A.rows());
  const auto m = static_cast<int>(B.cols());
  return -K * (x - reference.state(t, n)) + reference.input(t, m);
}

FeedbackLaw make_feedback(const LqrController & controller)
{
  return [controller](const Eigen::VectorXd & x, double t) {
    ControlSample out;
    out.u = controller.control(x, t);
    return out;
  };
}

}  // namespace ccm
