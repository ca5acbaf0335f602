#ifndef QCOMB_SIM_HPP
#define QCOMB_SIM_HPP

#include <cstdint>
#include <vector>

#include "qcomb/rng.hpp"
#include "qcomb/stats.hpp"

namespace qcomb {

struct CovarianceSpec {
  enum class Case { IdentityI, AR2, SpikedIII, Explicit };
  Case kind = Case::IdentityI;
  Eigen::Index dim = 0;  // p + q - 1
  double rho = 0.5;      // AR2 decay
  Matrix explicit_sigma;
};

const char* covariance_case_name(CovarianceSpec::Case c);
CovarianceSpec::Case parse_covariance_case(const std::string& name);

struct ExperimentConfig {
  Eigen::Index n = 100;
  Eigen::Index p_dim = 120;
  Eigen::Index q = 2;  // intercept plus one adjustment covariate
  double tau = 0.5;
  DistributionKind dist = DistributionKind::Normal;      // covariate innovations
  DistributionKind err_dist = DistributionKind::Normal;  // regression error
  CovarianceSpec::Case cov_case = CovarianceSpec::Case::IdentityI;
  Eigen::Index s = 0;            // sparsity; 0 under H0
  double beta_norm_sq = 0.5;
  Eigen::Index replications = 500;
  double alpha = 0.05;
  std::uint64_t master_seed = 1;
  CombinationRule rule = CombinationRule::CauchyEqualWeights;
  TraceMode trace_mode = TraceMode::Estimate;

  CovarianceSpec covariance() const {
    CovarianceSpec spec;
    spec.kind = cov_case;
    spec.dim = p_dim + q - 1;
    return spec;
  }
};

struct RateWithSE {
  double rate = 0.0;
  double se = 0.0;
};

struct ExperimentReport {
  ExperimentConfig config;
  RateWithSE cc;
  RateWithSE max;
  RateWithSE sum;
  Eigen::Index replications = 0;  // successful replications
  Eigen::Index failures = 0;
};

struct ProbeRow {
  double x = 0.0;
  double y = 0.0;
  double joint = 0.0;
  double product = 0.0;
  double gap = 0.0;
};

struct ProbeReport {
  std::vector<ProbeRow> rows;
  double correlation = 0.0;
  Eigen::Index replications = 0;
  Eigen::Index failures = 0;
};

Matrix build_sigma(const CovarianceSpec& spec, std::uint64_t seed);

/// Exact tr(Sigma_x^2) for the x-block of the generated covariance; used by
/// the oracle trace mode.
double oracle_trace_sq(const ExperimentConfig& cfg);

Vector draw_beta(Eigen::Index s, Eigen::Index p_dim, double norm_sq,
                 std::mt19937_64& stream);

/// One replication's data. `sigma_sqrt` is the cached PSD square root of
/// the (p+q-1)-dimensional covariance; beta may be empty (H0).
Dataset gen_dataset(const ExperimentConfig& cfg, const Matrix& sigma_sqrt,
                    const Vector& beta, std::uint64_t replication_index);

/// Convenience overload that builds Sigma^{1/2} from the config.
Dataset gen_dataset(const ExperimentConfig& cfg, const Vector& beta,
                    std::uint64_t replication_index);

ExperimentReport run_size_experiment(const ExperimentConfig& cfg,
                                     int threads = 1);

std::vector<ExperimentReport> run_power_experiment(
    const ExperimentConfig& cfg, const std::vector<Eigen::Index>& s_grid,
    int threads = 1);

/// Per-replication (z_sum, t_max_centered) pairs under the null config;
/// failed replications are skipped and counted in *failures when given.
std::vector<std::pair<double, double>> collect_null_statistics(
    const ExperimentConfig& cfg, int threads = 1,
    Eigen::Index* failures = nullptr);

/// Null-config probe of the joint law of (z_sum, t_max_centered).
ProbeReport run_independence_probe(
    const ExperimentConfig& cfg,
    const std::vector<std::pair<double, double>>& grid, int threads = 1);

/// Aggregate (z, y) pairs into joint/marginal-product gaps; exposed so the
/// probe machinery itself is testable on synthetic pairs.
ProbeReport aggregate_probe(const std::vector<std::pair<double, double>>& samples,
                            const std::vector<std::pair<double, double>>& grid);

}  // namespace qcomb

#endif  // QCOMB_SIM_HPP
