#ifndef QCOMB_NUMLIN_HPP
#define QCOMB_NUMLIN_HPP

#include <Eigen/Dense>

#include "qcomb/errors.hpp"

namespace qcomb {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Centered, unit-scale error/innovation families.
enum class DistributionKind { Normal, Laplace, Logistic, StudentT2 };

const char* distribution_name(DistributionKind d);
DistributionKind parse_distribution(const std::string& name);

/// Symmetric PSD square root via eigendecomposition. Eigenvalues below
/// -1e-10 * max|S| are rejected; small negatives are clamped to zero.
Matrix psd_sqrt(const Matrix& S);

/// W = X - Q (Q'X) with Q an orthonormal basis of col(Z); Z'W = 0.
/// Throws RankDeficientZ when the smallest singular value of Z is below
/// 1e-10 relative to the largest.
Matrix project_out(const Matrix& Z, const Matrix& X);

double std_normal_cdf(double x);

/// Inverse of std_normal_cdf, accurate to near machine precision.
double std_normal_quantile(double tau);

/// F^{-1}(tau) of the unit-scale standard form of `d`.
double base_quantile(DistributionKind d, double tau);

}  // namespace qcomb

#endif  // QCOMB_NUMLIN_HPP
