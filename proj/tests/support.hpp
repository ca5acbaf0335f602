// Test-only oracles, independent of the library's computation paths.
#ifndef QCOMB_TESTS_SUPPORT_HPP
#define QCOMB_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "qcomb/numlin.hpp"

namespace qcomb::testing {

// Explicit O(n^2 p) pairwise double sum for the sum statistic.
inline double brute_force_sum_statistic(const Matrix& X, const Vector& psi) {
  const auto n = X.rows();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j) acc += X.row(i).dot(X.row(j)) * psi[i] * psi[j];
  return 2.0 / (static_cast<double>(n) * static_cast<double>(n - 1)) * acc;
}

// Explicit per-column scan for the max statistic.
inline double brute_force_max_statistic(const Matrix& W, const Vector& psi,
                                        double tau) {
  double best = 0.0;
  for (Eigen::Index j = 0; j < W.cols(); ++j) {
    double num = 0.0, nrm = 0.0;
    for (Eigen::Index i = 0; i < W.rows(); ++i) {
      num += W(i, j) * psi[i];
      nrm += W(i, j) * W(i, j);
    }
    if (nrm <= 0) continue;
    best = std::max(best, num * num / (tau * (1.0 - tau) * nrm));
  }
  return best;
}

// One-sample Kolmogorov-Smirnov statistic against a given CDF.
inline double ks_statistic(std::vector<double> samples,
                           const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  const double m = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, std::max((static_cast<double>(i) + 1.0) / m - f,
                             f - static_cast<double>(i) / m));
  }
  return d;
}

// Asymptotic KS critical value at the 1% level.
inline double ks_critical_1pct(std::size_t m) {
  return 1.6276 / std::sqrt(static_cast<double>(m));
}

inline Matrix random_matrix(Eigen::Index n, Eigen::Index p,
                            std::mt19937_64& g) {
  std::normal_distribution<double> nd;
  Matrix m(n, p);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < p; ++j) m(i, j) = nd(g);
  return m;
}

inline Vector random_vector(Eigen::Index n, std::mt19937_64& g) {
  std::normal_distribution<double> nd;
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = nd(g);
  return v;
}

// Exact sample tau-quantile as the check-loss minimizer for q = 1:
// the ceil(n*tau)-th order statistic (any point of the flat region when
// n*tau is an integer).
inline double sample_quantile_vertex(std::vector<double> y, double tau) {
  std::sort(y.begin(), y.end());
  const double nt = static_cast<double>(y.size()) * tau;
  std::size_t k = static_cast<std::size_t>(std::ceil(nt));
  if (k == 0) k = 1;
  return y[k - 1];
}

}  // namespace qcomb::testing

#endif  // QCOMB_TESTS_SUPPORT_HPP
