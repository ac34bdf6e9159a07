#pragma once

#include <stdexcept>

#include <Eigen/Core>

#include "feedback.hpp"

namespace ccm {

class LqrDesignError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/**
 * @brief Stabilizing solution of A^T P + P A - P B R^{-1} B^T P + Q = 0.
 *
 * Matrix-sign iteration on the Hamiltonian, polished with Newton-Kleinman steps.
 * Throws LqrDesignError when (A, B) is not stabilizable or the result fails its checks.
 */
Eigen::MatrixXd solve_care(const Eigen::MatrixXd & A,
                           const Eigen::MatrixXd & B,
                           const Eigen::MatrixXd & Q,
                           const Eigen::MatrixXd & R);

double care_residual(const Eigen::MatrixXd & A,
                     const Eigen::MatrixXd & B,
                     const Eigen::MatrixXd & Q,
                     const Eigen::MatrixXd & R,
                     const Eigen::MatrixXd & P);

/// PBH test on the closed right half plane.
bool is_stabilizable(const Eigen::MatrixXd & A, const Eigen::MatrixXd & B);

/// All eigenvalues strictly in the open left half plane.
bool is_hurwitz(const Eigen::MatrixXd & A);

struct LqrController
{
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd Q;
  Eigen::MatrixXd R;
  Eigen::MatrixXd P;
  Eigen::MatrixXd K;  ///< R^{-1} B^T P
  Reference reference;

  /// u = -K (x - x*(t)) + u*(t)
  Eigen::VectorXd control(const Eigen::VectorXd & x, double t) const;
};

LqrController lqr_design(const Eigen::MatrixXd & A,
                         const Eigen::MatrixXd & B,
                         const Eigen::MatrixXd & Q,
                         const Eigen::MatrixXd & R,
                         Reference reference = {});

FeedbackLaw make_feedback(const LqrController & controller);

}  // namespace ccm
