#include "qcomb/numlin.hpp"

#include <cmath>
#include <string>

namespace qcomb {

const char* distribution_name(DistributionKind d) {
  switch (d) {
    case DistributionKind::Normal:
      return "normal";
    case DistributionKind::Laplace:
      return "laplace";
    case DistributionKind::Logistic:
      return "logistic";
    case DistributionKind::StudentT2:
      return "t2";
  }
  return "unknown";
}

DistributionKind parse_distribution(const std::string& name) {
  if (name == "normal") return DistributionKind::Normal;
  if (name == "laplace") return DistributionKind::Laplace;
  if (name == "logistic") return DistributionKind::Logistic;
  if (name == "t2") return DistributionKind::StudentT2;
  throw DataError("unknown distribution: " + name);
}

Matrix psd_sqrt(const Matrix& S) {
  if (S.rows() != S.cols()) throw NotSymmetric("psd_sqrt: matrix not square");
  const double scale = S.cwiseAbs().maxCoeff();
  const double tol = 1e-10 * (scale > 0 ? scale : 1.0);
  if ((S - S.transpose()).cwiseAbs().maxCoeff() > tol)
    throw NotSymmetric("psd_sqrt: matrix not symmetric within tolerance");

  Eigen::SelfAdjointEigenSolver<Matrix> eig(S);
  if (eig.info() != Eigen::Success)
    throw NumericError("psd_sqrt: eigendecomposition failed");
  Vector lam = eig.eigenvalues();
  if (lam.minCoeff() < -tol)
    throw NotPSD("psd_sqrt: eigenvalue below -tolerance");
  lam = lam.cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().transpose();
}

Matrix project_out(const Matrix& Z, const Matrix& X) {
  const auto n = Z.rows();
  const auto q = Z.cols();
  if (X.rows() != n) throw DimensionMismatch("project_out: row mismatch");
  if (n <= q) throw RankDeficientZ("project_out: n must exceed q");

  Eigen::JacobiSVD<Matrix> svd(Z);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  if (smax <= 0 || smin <= 1e-10 * smax)
    throw RankDeficientZ("project_out: Z is rank deficient");

  Eigen::HouseholderQR<Matrix> qr(Z);
  Matrix Q = qr.householderQ() * Matrix::Identity(n, q);
  return X - Q * (Q.transpose() * X);
}

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

// Acklam's rational approximation followed by one Halley refinement.
double std_normal_quantile(double tau) {
  if (!(tau > 0.0 && tau < 1.0))
    throw TauOutOfRange("std_normal_quantile: tau must be in (0,1)");

  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (tau < plow) {
    const double u = std::sqrt(-2.0 * std::log(tau));
    x = (((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
        ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
  } else if (tau <= 1.0 - plow) {
    const double u = tau - 0.5;
    const double r = u * u;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        u /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double u = std::sqrt(-2.0 * std::log(1.0 - tau));
    x = -(((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
        ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
  }
  const double e = std_normal_cdf(x) - tau;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

double base_quantile(DistributionKind d, double tau) {
  if (!(tau > 0.0 && tau < 1.0))
    throw TauOutOfRange("base_quantile: tau must be in (0,1)");
  switch (d) {
    case DistributionKind::Normal:
      return std_normal_quantile(tau);
    case DistributionKind::Laplace:
      return tau < 0.5 ? std::log(2.0 * tau) : -std::log(2.0 * (1.0 - tau));
    case DistributionKind::Logistic:
      return std::log(tau / (1.0 - tau));
    case DistributionKind::StudentT2: {
      const double u = 2.0 * tau - 1.0;
      return u * std::sqrt(2.0 / (1.0 - u * u));
    }
  }
  throw NumericError("base_quantile: unreachable");
}

}  // namespace qcomb
