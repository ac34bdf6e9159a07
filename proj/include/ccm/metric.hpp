#pragma once

/**
 * @file
 * @brief Polynomial control contraction metric: the dual metric W(x), the
 * multiplier rho(x), and the derived Riemannian metric M(x) = W(x)^{-1}.
 */

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "basis.hpp"

namespace ccm {

/// Raised when W(x) is too badly conditioned to invert meaningfully.
class SingularMetricError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/**
 * @brief W(x) = sum_p W_p x_v^p and rho(x) = sum_p rho_p x_v^p, with x_v the state
 * variable at var_index. Coefficients are stored in ascending powers.
 */
template<typename Scalar = double>
class PolynomialMetric
{
public:
  using Vector = VectorX<Scalar>;
  using Matrix = MatrixX<Scalar>;

  /// Condition-number limit past which eval_M signals SingularMetricError.
  static constexpr double kMaxCondition = 1e12;

  PolynomialMetric(int n,
                   int var_index,
                   Scalar lambda,
                   std::vector<Matrix> W_coeffs,
                   std::vector<Scalar> rho_coeffs,
                   std::pair<Scalar, Scalar> bounds)
      : n_(n), var_index_(var_index), lambda_(lambda), W_(std::move(W_coeffs)), rho_(std::move(rho_coeffs)),
        bounds_(bounds)
  {
    if (n_ < 1) { throw std::invalid_argument("metric: n must be positive"); }
    if (var_index_ < 0 || var_index_ >= n_) {
      throw std::invalid_argument("metric: var_index " + std::to_string(var_index_) + " out of range");
    }
    if (!(lambda_ > Scalar(0))) { throw std::invalid_argument("metric: lambda must be positive"); }
    if (W_.empty()) { throw std::invalid_argument("metric: W needs at least one coefficient matrix"); }
    for (std::size_t p = 0; p < W_.size(); ++p) {
      const Matrix & Wp = W_[p];
      if (Wp.rows() != n_ || Wp.cols() != n_) {
        throw std::invalid_argument("metric: W[" + std::to_string(p) + "] is not " + std::to_string(n_) + "x"
                                    + std::to_string(n_));
      }
      if ((Wp - Wp.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-12)) {
        throw std::invalid_argument("metric: W[" + std::to_string(p) + "] is not symmetric");
      }
    }
    if (rho_.empty()) { rho_.push_back(Scalar(0)); }
    if (!(bounds_.first > Scalar(0)) || bounds_.second < bounds_.first) {
      throw std::invalid_argument("metric: bounds must satisfy 0 < alpha_low <= alpha_high");
    }
  }

  /// Constant metric W(x) = W0, rho(x) = rho0.
  static PolynomialMetric constant(const Matrix & W0, Scalar rho0 = 0, Scalar lambda = Scalar(0.5))
  {
    Eigen::SelfAdjointEigenSolver<Matrix> es(W0);
    const auto & ev = es.eigenvalues();
    return PolynomialMetric(static_cast<int>(W0.rows()), 0, lambda, {W0}, {rho0}, {ev.minCoeff(), ev.maxCoeff()});
  }

  int n() const { return n_; }
  int var_index() const { return var_index_; }
  Scalar lambda() const { return lambda_; }
  const std::vector<Matrix> & W_coeffs() const { return W_; }
  const std::vector<Scalar> & rho_coeffs() const { return rho_; }
  std::pair<Scalar, Scalar> bounds() const { return bounds_; }

  /// Copy with a different contraction rate.
  PolynomialMetric with_lambda(Scalar lambda) const
  {
    return PolynomialMetric(n_, var_index_, lambda, W_, rho_, bounds_);
  }

  template<typename Derived>
  Matrix eval_W(const Eigen::MatrixBase<Derived> & x) const
  {
    check_dim(x.size());
    const Scalar v = x(var_index_);
    // Horner in the scalar variable.
    Matrix W = W_.back();
    for (std::size_t p = W_.size() - 1; p-- > 0;) { W = W * v + W_[p]; }
    return W;
  }

  /// M(x) = W(x)^{-1}, symmetrized.
  template<typename Derived>
  Matrix eval_M(const Eigen::MatrixBase<Derived> & x) const
  {
    return invert(eval_W(x));
  }

  /// dW/dx_i; zero unless i is the polynomial variable.
  template<typename Derived>
  Matrix dW_dx(const Eigen::MatrixBase<Derived> & x, int i) const
  {
    check_dim(x.size());
    if (i < 0 || i >= n_) { throw std::invalid_argument("dW_dx: variable index out of range"); }
    if (i != var_index_ || W_.size() < 2) { return Matrix::Zero(n_, n_); }
    const Scalar v = x(var_index_);
    Matrix dW = W_.back() * Scalar(W_.size() - 1);
    for (std::size_t p = W_.size() - 1; p-- > 1;) { dW = dW * v + W_[p] * Scalar(p); }
    return dW;
  }

  template<typename Derived>
  Scalar rho(const Eigen::MatrixBase<Derived> & x) const
  {
    check_dim(x.size());
    const Scalar v = x(var_index_);
    Scalar r = rho_.back();
    for (std::size_t p = rho_.size() - 1; p-- > 0;) { r = r * v + rho_[p]; }
    return r;
  }

  /// e = gamma_s^T M(gamma) gamma_s.
  template<typename D1, typename D2>
  Scalar energy_integrand(const Eigen::MatrixBase<D1> & point, const Eigen::MatrixBase<D2> & tangent) const
  {
    check_dim(tangent.size());
    const Matrix M = eval_M(point);
    return tangent.dot(M * tangent);
  }

  /// Inverse of a symmetric matrix with the singularity check applied by eval_M.
  Matrix invert(const Matrix & W) const
  {
    Eigen::LDLT<Matrix> ldlt(W);
    if (ldlt.info() != Eigen::Success) { throw SingularMetricError("metric: W(x) factorization failed"); }
    if (!(ldlt.vectorD().minCoeff() > Scalar(0))) { throw SingularMetricError("metric: W(x) is not positive definite"); }
    const Scalar rcond = ldlt.rcond();
    if (!(rcond > Scalar(1.0 / kMaxCondition))) {
      throw SingularMetricError("metric: W(x) is singular (condition estimate exceeds 1e12)");
    }
    Matrix M = ldlt.solve(Matrix::Identity(n_, n_));
    return (M + M.transpose()) / Scalar(2);
  }

private:
  void check_dim(Eigen::Index size) const
  {
    if (size != n_) {
      throw std::invalid_argument("metric: state has dimension " + std::to_string(size) + ", expected "
                                  + std::to_string(n_));
    }
  }

  int n_;
  int var_index_;
  Scalar lambda_;
  std::vector<Matrix> W_;
  std::vector<Scalar> rho_;
  std::pair<Scalar, Scalar> bounds_;
};

using Metric = PolynomialMetric<double>;

}  // namespace ccm
