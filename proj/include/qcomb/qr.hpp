#ifndef QCOMB_QR_HPP
#define QCOMB_QR_HPP

#include "qcomb/numlin.hpp"

namespace qcomb {

/// Response, nuisance design (first column all ones), and the
/// high-dimensional design under test.
struct Dataset {
  Vector Y;
  Matrix Z;  // n x q, first column identically 1
  Matrix X;  // n x p
  double tau = 0.5;

  Eigen::Index n() const { return Y.size(); }
  Eigen::Index q() const { return Z.cols(); }
  Eigen::Index p() const { return X.cols(); }

  void validate() const;
};

struct QuantileFit {
  Vector alpha_hat;
  Vector psi_hat;  // entries in {-tau, 1-tau}
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// rho_tau(t) = t * (tau - I(t < 0)).
double check_loss(double t, double tau);

/// Sum of rho_tau over the residuals Y - Z*alpha.
double check_loss_objective(const Vector& Y, const Matrix& Z,
                            const Vector& alpha, double tau);

/// Minimize the check loss of Y on Z by a primal-dual interior-point method
/// on the bounded-variables dual, followed by a vertex polish. Throws
/// NoConvergence if the duality gap is still above tolerance at the
/// iteration cap.
QuantileFit fit_nuisance(const Vector& Y, const Matrix& Z, double tau);

/// psi_i = I(Y_i - Z_i'alpha <= 0) - tau.
Vector quantile_score(const Vector& Y, const Matrix& Z, const Vector& alpha,
                      double tau);

}  // namespace qcomb

#endif  // QCOMB_QR_HPP
