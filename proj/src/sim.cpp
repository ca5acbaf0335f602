#include "qcomb/sim.hpp"

#include <cmath>
#include <thread>

namespace qcomb {

const char* covariance_case_name(CovarianceSpec::Case c) {
  switch (c) {
    case CovarianceSpec::Case::IdentityI:
      return "identity";
    case CovarianceSpec::Case::AR2:
      return "ar";
    case CovarianceSpec::Case::SpikedIII:
      return "spiked";
    case CovarianceSpec::Case::Explicit:
      return "explicit";
  }
  return "unknown";
}

CovarianceSpec::Case parse_covariance_case(const std::string& name) {
  if (name == "identity" || name == "I" || name == "1")
    return CovarianceSpec::Case::IdentityI;
  if (name == "ar" || name == "II" || name == "2") return CovarianceSpec::Case::AR2;
  if (name == "spiked" || name == "III" || name == "3")
    return CovarianceSpec::Case::SpikedIII;
  throw DataError("unknown covariance case: " + name);
}

Matrix build_sigma(const CovarianceSpec& spec, std::uint64_t seed) {
  if (spec.dim < 1) throw DataError("build_sigma: dim must be >= 1");
  const auto d = spec.dim;
  switch (spec.kind) {
    case CovarianceSpec::Case::IdentityI:
      return Matrix::Identity(d, d);
    case CovarianceSpec::Case::AR2: {
      Matrix s(d, d);
      for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
          s(i, j) = std::pow(spec.rho, std::abs(static_cast<double>(i - j)));
      return s;
    }
    case CovarianceSpec::Case::SpikedIII: {
      const auto l = static_cast<Eigen::Index>(
          std::floor(std::pow(static_cast<double>(d), 0.3)));
      auto g = make_stream(seed, StreamPurpose::Covariance, 0);
      Vector b = Vector::Zero(d);
      for (Eigen::Index i = 0; i < l; ++i)
        b[i] = 0.7 + 0.2 * uniform_open01(g);
      Matrix s = Matrix::Identity(d, d) + b * b.transpose();
      s.diagonal() -= b.cwiseProduct(b);
      return s;
    }
    case CovarianceSpec::Case::Explicit: {
      const double scale = spec.explicit_sigma.cwiseAbs().maxCoeff();
      Eigen::SelfAdjointEigenSolver<Matrix> eig(spec.explicit_sigma,
                                                Eigen::EigenvaluesOnly);
      if (eig.eigenvalues().minCoeff() < -1e-10 * scale)
        throw NotPSD("build_sigma: explicit covariance is not PSD");
      return spec.explicit_sigma;
    }
  }
  throw DataError("build_sigma: unreachable");
}

double oracle_trace_sq(const ExperimentConfig& cfg) {
  const Matrix sigma = build_sigma(cfg.covariance(), cfg.master_seed);
  const auto p = cfg.p_dim;
  const Matrix sx = sigma.bottomRightCorner(p, p);
  return (sx * sx).trace();
}

Vector draw_beta(Eigen::Index s, Eigen::Index p_dim, double norm_sq,
                 std::mt19937_64& stream) {
  if (s < 1 || s > p_dim)
    throw SparsityOutOfRange("draw_beta: need 1 <= s <= p");
  if (!(norm_sq > 0.0)) throw DataError("draw_beta: norm_sq must be positive");
  Vector beta = Vector::Zero(p_dim);
  for (Eigen::Index i = 0; i < s; ++i)
    beta[i] = draw(DistributionKind::Normal, stream);
  const double nrm = beta.norm();
  if (nrm == 0.0) beta[0] = 1.0;  // measure-zero safeguard
  beta *= std::sqrt(norm_sq) / beta.norm();
  return beta;
}

Dataset gen_dataset(const ExperimentConfig& cfg, const Matrix& sigma_sqrt,
                    const Vector& beta, std::uint64_t replication_index) {
  const auto n = cfg.n;
  const auto p = cfg.p_dim;
  const auto q = cfg.q;
  const auto dim = p + q - 1;
  if (sigma_sqrt.rows() != dim)
    throw DimensionMismatch("gen_dataset: sigma root dimension");
  if (beta.size() != 0 && beta.size() != p)
    throw DimensionMismatch("gen_dataset: beta length");

  auto g = make_stream(cfg.master_seed, StreamPurpose::Data, replication_index);

  Matrix u(n, dim);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) u(i, j) = draw(cfg.dist, g);
  const Matrix U = u * sigma_sqrt;  // sigma_sqrt is symmetric

  Dataset data;
  data.tau = cfg.tau;
  data.Z.resize(n, q);
  data.Z.col(0).setOnes();
  if (q > 1) data.Z.rightCols(q - 1) = U.leftCols(q - 1);
  data.X = U.rightCols(p);

  // Error centered at its tau-quantile so that P(eps <= 0) = tau exactly.
  const double shift = base_quantile(cfg.err_dist, cfg.tau);
  Vector eps(n);
  for (Eigen::Index i = 0; i < n; ++i) eps[i] = draw(cfg.err_dist, g) - shift;

  data.Y = eps;
  if (beta.size() != 0) data.Y += data.X * beta;
  return data;
}

Dataset gen_dataset(const ExperimentConfig& cfg, const Vector& beta,
                    std::uint64_t replication_index) {
  const Matrix sigma = build_sigma(cfg.covariance(), cfg.master_seed);
  return gen_dataset(cfg, psd_sqrt(sigma), beta, replication_index);
}

namespace {

struct ReplicationOutcome {
  bool ok = false;
  bool rej_cc = false;
  bool rej_max = false;
  bool rej_sum = false;
  double z_sum = 0.0;
  double t_max_centered = 0.0;
};

// Runs all replications of one configuration; results are stored by index so
// aggregation is independent of the thread schedule.
std::vector<ReplicationOutcome> run_replications(const ExperimentConfig& cfg,
                                                 Eigen::Index s, int threads) {
  const Matrix sigma = build_sigma(cfg.covariance(), cfg.master_seed);
  const Matrix root = psd_sqrt(sigma);
  const double oracle = cfg.trace_mode == TraceMode::Oracle
                            ? (sigma.bottomRightCorner(cfg.p_dim, cfg.p_dim) *
                               sigma.bottomRightCorner(cfg.p_dim, cfg.p_dim))
                                  .trace()
                            : 0.0;

  std::vector<ReplicationOutcome> out(
      static_cast<std::size_t>(cfg.replications));

  auto worker = [&](Eigen::Index begin, Eigen::Index end) {
    for (Eigen::Index r = begin; r < end; ++r) {
      try {
        Vector beta;
        if (s > 0) {
          auto bg = make_stream(cfg.master_seed, StreamPurpose::Beta,
                                static_cast<std::uint64_t>(r));
          beta = draw_beta(s, cfg.p_dim, cfg.beta_norm_sq, bg);
        }
        const Dataset data =
            gen_dataset(cfg, root, beta, static_cast<std::uint64_t>(r));
        const TestResult res = run_full_test(
            data, cfg.rule, cfg.trace_mode,
            cfg.trace_mode == TraceMode::Oracle
                ? std::optional<double>(oracle)
                : std::nullopt);
        auto& o = out[static_cast<std::size_t>(r)];
        o.ok = true;
        o.rej_cc = res.p_cc <= cfg.alpha;
        o.rej_max = res.p_max <= cfg.alpha;
        o.rej_sum = res.p_sum <= cfg.alpha;
        o.z_sum = res.z_sum;
        o.t_max_centered = res.t_max_centered;
      } catch (const Error&) {
        out[static_cast<std::size_t>(r)].ok = false;
      }
    }
  };

  threads = std::max(1, threads);
  if (threads == 1 || cfg.replications < 2) {
    worker(0, cfg.replications);
  } else {
    std::vector<std::thread> pool;
    const Eigen::Index chunk =
        (cfg.replications + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const Eigen::Index begin = t * chunk;
      const Eigen::Index end = std::min(cfg.replications, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(worker, begin, end);
    }
    for (auto& th : pool) th.join();
  }
  return out;
}

RateWithSE make_rate(Eigen::Index hits, Eigen::Index total) {
  RateWithSE r;
  if (total > 0) {
    r.rate = static_cast<double>(hits) / static_cast<double>(total);
    r.se = std::sqrt(r.rate * (1.0 - r.rate) / static_cast<double>(total));
  }
  return r;
}

ExperimentReport aggregate(const ExperimentConfig& cfg, Eigen::Index s,
                           const std::vector<ReplicationOutcome>& outs) {
  Eigen::Index ok = 0, cc = 0, mx = 0, sm = 0;
  for (const auto& o : outs) {
    if (!o.ok) continue;
    ++ok;
    cc += o.rej_cc;
    mx += o.rej_max;
    sm += o.rej_sum;
  }
  if (ok == 0)
    throw AllReplicationsFailed("experiment: every replication errored");
  ExperimentReport rep;
  rep.config = cfg;
  rep.config.s = s;
  rep.cc = make_rate(cc, ok);
  rep.max = make_rate(mx, ok);
  rep.sum = make_rate(sm, ok);
  rep.replications = ok;
  rep.failures = static_cast<Eigen::Index>(outs.size()) - ok;
  return rep;
}

}  // namespace

ExperimentReport run_size_experiment(const ExperimentConfig& cfg,
                                     int threads) {
  if (cfg.replications < 1) throw DataError("experiment: replications >= 1");
  return aggregate(cfg, 0, run_replications(cfg, 0, threads));
}

std::vector<ExperimentReport> run_power_experiment(
    const ExperimentConfig& cfg, const std::vector<Eigen::Index>& s_grid,
    int threads) {
  if (cfg.replications < 1) throw DataError("experiment: replications >= 1");
  std::vector<ExperimentReport> reports;
  reports.reserve(s_grid.size());
  for (const auto s : s_grid)
    reports.push_back(aggregate(cfg, s, run_replications(cfg, s, threads)));
  return reports;
}

ProbeReport aggregate_probe(
    const std::vector<std::pair<double, double>>& samples,
    const std::vector<std::pair<double, double>>& grid) {
  const double m = static_cast<double>(samples.size());
  if (samples.empty()) throw DataError("probe: no samples");

  ProbeReport rep;
  rep.replications = static_cast<Eigen::Index>(samples.size());
  for (const auto& [gx, gy] : grid) {
    double joint = 0.0, fx = 0.0, fy = 0.0;
    for (const auto& [x, y] : samples) {
      joint += (x <= gx && y <= gy);
      fx += (x <= gx);
      fy += (y <= gy);
    }
    ProbeRow row;
    row.x = gx;
    row.y = gy;
    row.joint = joint / m;
    row.product = (fx / m) * (fy / m);
    row.gap = std::abs(row.joint - row.product);
    rep.rows.push_back(row);
  }

  double sx = 0, sy = 0;
  for (const auto& [x, y] : samples) {
    sx += x;
    sy += y;
  }
  sx /= m;
  sy /= m;
  double cxy = 0, vx = 0, vy = 0;
  for (const auto& [x, y] : samples) {
    cxy += (x - sx) * (y - sy);
    vx += (x - sx) * (x - sx);
    vy += (y - sy) * (y - sy);
  }
  rep.correlation = (vx > 0 && vy > 0) ? cxy / std::sqrt(vx * vy) : 0.0;
  return rep;
}

std::vector<std::pair<double, double>> collect_null_statistics(
    const ExperimentConfig& cfg, int threads, Eigen::Index* failures) {
  const auto outs = run_replications(cfg, 0, threads);
  std::vector<std::pair<double, double>> samples;
  samples.reserve(outs.size());
  Eigen::Index failed = 0;
  for (const auto& o : outs) {
    if (o.ok)
      samples.emplace_back(o.z_sum, o.t_max_centered);
    else
      ++failed;
  }
  if (samples.empty())
    throw AllReplicationsFailed("probe: every replication errored");
  if (failures) *failures = failed;
  return samples;
}

ProbeReport run_independence_probe(
    const ExperimentConfig& cfg,
    const std::vector<std::pair<double, double>>& grid, int threads) {
  Eigen::Index failures = 0;
  const auto samples = collect_null_statistics(cfg, threads, &failures);
  ProbeReport rep = aggregate_probe(samples, grid);
  rep.failures = failures;
  return rep;
}

}  // namespace qcomb
