#include "qcomb/qr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace qcomb {

void Dataset::validate() const {
  if (!(tau > 0.0 && tau < 1.0)) throw TauOutOfRange("dataset: tau not in (0,1)");
  if (Z.rows() != n() || X.rows() != n())
    throw DimensionMismatch("dataset: row counts differ");
  if (n() < q() + 1) throw TooFewRows("dataset: need n >= q + 1");
  if (q() < 1 || (Z.col(0).array() != 1.0).any())
    throw DataError("dataset: first column of Z must be all ones");
  if (!Y.allFinite() || !Z.allFinite() || !X.allFinite())
    throw DataError("dataset: non-finite values");
}

double check_loss(double t, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw TauOutOfRange("check_loss: tau not in (0,1)");
  return t < 0.0 ? t * (tau - 1.0) : t * tau;
}

double check_loss_objective(const Vector& Y, const Matrix& Z,
                            const Vector& alpha, double tau) {
  const Vector r = Y - Z * alpha;
  return (r.array() * (tau - (r.array() < 0.0).cast<double>())).sum();
}

Vector quantile_score(const Vector& Y, const Matrix& Z, const Vector& alpha,
                      double tau) {
  if (Z.rows() != Y.size() || Z.cols() != alpha.size())
    throw DimensionMismatch("quantile_score: dimension mismatch");
  const Vector r = Y - Z * alpha;
  return (r.array() <= 0.0).cast<double>() - tau;
}

namespace {

// Exact-vertex polish: a check-loss minimizer interpolates q observations,
// so re-solve on the rows with the smallest |residual| and keep the vertex
// if it does not worsen the objective.
void polish_vertex(const Vector& Y, const Matrix& Z, double tau,
                   Vector& alpha, double& objective) {
  const auto n = Y.size();
  const auto q = Z.cols();
  Vector r = Y - Z * alpha;
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(r[a]) < std::abs(r[b]);
  });

  const Eigen::Index window = std::min<Eigen::Index>(n - q, q);
  for (Eigen::Index off = 0; off <= window; ++off) {
    Matrix Zb(q, q);
    Vector Yb(q);
    for (Eigen::Index k = 0; k < q; ++k) {
      Zb.row(k) = Z.row(idx[static_cast<std::size_t>(off + k)]);
      Yb[k] = Y[idx[static_cast<std::size_t>(off + k)]];
    }
    Eigen::FullPivLU<Matrix> lu(Zb);
    if (!lu.isInvertible()) continue;
    const Vector cand = lu.solve(Yb);
    const double obj = check_loss_objective(Y, Z, cand, tau);
    if (obj <= objective * (1.0 + 1e-12) + 1e-300) {
      if (obj < objective) {
        alpha = cand;
        objective = obj;
      } else if (off == 0) {
        // Tie: prefer the exact vertex so residuals at basic rows are
        // exactly zero.
        alpha = cand;
        objective = obj;
      }
      return;
    }
  }
}

}  // namespace

// Interior-point solve of the quantile-regression LP through its dual
//   max Y'a  s.t.  Z'a = (1-tau) Z'1,  0 <= a <= 1,
// whose equality multiplier is the primal coefficient vector alpha.
// Mehrotra predictor-corrector; each step solves a q x q normal system.
QuantileFit fit_nuisance(const Vector& Y, const Matrix& Z, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw TauOutOfRange("fit_nuisance: tau not in (0,1)");
  const auto n = Y.size();
  const auto q = Z.cols();
  if (Z.rows() != n) throw DimensionMismatch("fit_nuisance: Z rows != |Y|");
  if (n < q + 1) throw TooFewRows("fit_nuisance: need n >= q + 1");
  {
    Eigen::JacobiSVD<Matrix> svd(Z);
    const double smax = svd.singularValues().maxCoeff();
    if (smax <= 0 || svd.singularValues().minCoeff() <= 1e-10 * smax)
      throw RankDeficientZ("fit_nuisance: Z is rank deficient");
  }

  constexpr int kMaxIter = 200;
  constexpr double kGapTol = 1e-11;
  constexpr double kStepFactor = 0.9995;

  const Vector rhs_eq = (1.0 - tau) * (Z.transpose() * Vector::Ones(n));

  // Strictly interior start; a = (1-tau) 1 satisfies the equality exactly.
  Vector a = Vector::Constant(n, 1.0 - tau);
  Vector s = Vector::Constant(n, tau);
  Vector b = Z.colPivHouseholderQr().solve(Y);
  Vector e = Y - Z * b;
  const double shift = std::max(1e-4, 1e-4 * e.cwiseAbs().maxCoeff());
  Vector z = e.cwiseMax(0.0).array() + shift;
  Vector w = (-e).cwiseMax(0.0).array() + shift;

  const double obj_scale = 1.0 + std::abs(check_loss_objective(Y, Z, b, tau));

  int iter = 0;
  bool converged = false;
  for (; iter < kMaxIter; ++iter) {
    const double primal_obj = check_loss_objective(Y, Z, b, tau);
    const double dual_obj = Y.dot(a) - (1.0 - tau) * Y.sum();
    const double gap = primal_obj - dual_obj;
    const double mu_gap = s.dot(z) + a.dot(w);
    if (std::abs(gap) <= kGapTol * (1.0 + std::abs(primal_obj)) &&
        mu_gap <= kGapTol * obj_scale * 10.0) {
      converged = true;
      break;
    }

    const Vector d = (z.array() / s.array() + w.array() / a.array()).matrix();
    const Vector dinv = d.cwiseInverse();
    const Vector rd = Y - Z * b - z + w;
    const Vector rp = rhs_eq - Z.transpose() * a;

    const Matrix M =
        Z.transpose() * dinv.asDiagonal() * Z;  // q x q, SPD
    Eigen::LDLT<Matrix> ldlt(M);

    auto solve_step = [&](const Vector& mu_z, const Vector& mu_w, Vector& da,
                          Vector& db, Vector& dz, Vector& dw) {
      const Vector rhs1 = rd.array() - mu_z.array() / s.array() + z.array() +
                          mu_w.array() / a.array() - w.array();
      db = ldlt.solve(Z.transpose() * (dinv.cwiseProduct(rhs1)) - rp);
      da = dinv.cwiseProduct(rhs1 - Z * db);
      dz = (mu_z.array() - s.array() * z.array()) / s.array() +
           (z.array() / s.array()) * da.array();
      dw = (mu_w.array() - a.array() * w.array()) / a.array() -
           (w.array() / a.array()) * da.array();
    };

    auto max_step = [&](const Vector& da, const Vector& dz,
                        const Vector& dw) {
      double ap = 1.0, ad = 1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (da[i] < 0) ap = std::min(ap, -a[i] / da[i]);
        if (da[i] > 0) ap = std::min(ap, s[i] / da[i]);
        if (dz[i] < 0) ad = std::min(ad, -z[i] / dz[i]);
        if (dw[i] < 0) ad = std::min(ad, -w[i] / dw[i]);
      }
      return std::pair{std::min(1.0, kStepFactor * ap),
                       std::min(1.0, kStepFactor * ad)};
    };

    // Predictor (affine scaling).
    Vector da, db, dz, dw;
    const Vector zero = Vector::Zero(n);
    solve_step(zero, zero, da, db, dz, dw);
    auto [ap_aff, ad_aff] = max_step(da, dz, dw);
    const double gap_aff = (s - ap_aff * da).dot(z + ad_aff * dz) +
                           (a + ap_aff * da).dot(w + ad_aff * dw);
    const double sigma =
        mu_gap > 0 ? std::pow(gap_aff / mu_gap, 3.0) : 0.0;
    const double mu = sigma * mu_gap / (2.0 * static_cast<double>(n));

    // Corrector with second-order complementarity terms.
    const Vector mu_z = (mu + (da.array() * dz.array())).matrix();
    const Vector mu_w = (mu - (da.array() * dw.array())).matrix();
    solve_step(mu_z, mu_w, da, db, dz, dw);
    auto [ap, ad] = max_step(da, dz, dw);

    a += ap * da;
    s -= ap * da;
    z += ad * dz;
    w += ad * dw;
    b += ad * db;
  }

  QuantileFit fit;
  fit.alpha_hat = b;
  fit.objective = check_loss_objective(Y, Z, b, tau);
  fit.iterations = iter;
  fit.converged = converged;
  polish_vertex(Y, Z, tau, fit.alpha_hat, fit.objective);
  if (!converged) {
    // The polish can still land on the optimum; re-check before failing.
    const double dual_obj = Y.dot(a) - (1.0 - tau) * Y.sum();
    if (fit.objective - dual_obj >
        1e-8 * (1.0 + std::abs(fit.objective)))
      throw NoConvergence("fit_nuisance: iteration cap hit with open gap");
    fit.converged = true;
  }
  fit.psi_hat = quantile_score(Y, Z, fit.alpha_hat, tau);
  return fit;
}

}  // namespace qcomb
