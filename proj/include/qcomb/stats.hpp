#ifndef QCOMB_STATS_HPP
#define QCOMB_STATS_HPP

#include <optional>
#include <vector>

#include "qcomb/qr.hpp"

namespace qcomb {

enum class CombinationRule { CauchyEqualWeights, CauchyPaperSum, MinP };

const char* combination_rule_name(CombinationRule r);
CombinationRule parse_combination_rule(const std::string& name);

enum class TraceMode { Estimate, Oracle };

struct TestResult {
  double t_sum = 0.0;
  double z_sum = 0.0;
  double p_sum = 1.0;
  double t_max = 0.0;
  double t_max_centered = 0.0;
  double p_max = 1.0;
  double t_cc = 0.0;
  double p_cc = 1.0;
  double trace_estimate = 0.0;
  double tau = 0.5;
  Eigen::Index n = 0;
  Eigen::Index p_dim = 0;  // retained columns entering the Gumbel centering
};

struct Combined {
  double statistic = 0.0;
  double p_combined = 1.0;
  bool reject = false;
};

struct MaxStat {
  double t_max = 0.0;
  Eigen::Index argmax_col = 0;
  Eigen::Index retained = 0;
  std::vector<Eigen::Index> dropped;  // zero-norm columns excluded
};

/// T_SUM = 2/(n(n-1)) * sum_{i != j} X_i'X_j psi_i psi_j, evaluated through
/// the column identity ||X'psi||^2 - sum_i ||X_i||^2 psi_i^2.
double sum_statistic(const Matrix& X, const Vector& psi_hat);

/// Estimate of tr(Sigma_x^2) from the pairwise-deleted-mean cross-product
/// U-statistic, bias-corrected to be exactly unbiased under Gaussian
/// sampling; clamped below at 1e-12.
double trace_sigma2_estimate(const Matrix& X);

/// Standardize the sum statistic and return its upper-tail p-value.
std::pair<double, double> sum_pvalue(double t_sum, Eigen::Index n, double tau,
                                     double trace_est);

/// Max of squared standardized column scores of W. Columns with
/// ||W_.j||^2 <= 1e-12 * n are dropped.
MaxStat max_statistic(const Matrix& W, const Vector& psi_hat, double tau);

/// Gumbel limit G(y) = exp(-pi^{-1/2} e^{-y/2}).
double gumbel_cdf(double y);
double gumbel_quantile(double u);

/// p_max from the Gumbel limit of t_max - 2 log p + log log p.
double max_pvalue(double t_max, Eigen::Index p_dim);

Combined combine(double p_sum, double p_max, CombinationRule rule,
                 double alpha);

/// Clamp a p-value away from {0,1} before the tangent transform.
inline double clamp_pvalue(double p) {
  return std::min(1.0 - 1e-15, std::max(1e-15, p));
}

/// Full pipeline: fit alpha on Z, score, project, all statistics and
/// p-values. With TraceMode::Oracle the caller supplies tr(Sigma_x^2).
TestResult run_full_test(const Dataset& data, CombinationRule rule,
                         TraceMode trace_mode,
                         std::optional<double> oracle_trace = std::nullopt);

}  // namespace qcomb

#endif  // QCOMB_STATS_HPP
