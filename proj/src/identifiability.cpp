#include "sgn/identifiability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sgn/errors.hpp"
#include "sgn/metrics.hpp"

namespace sgn {

S1Certificate s1_injectivity_check(const MeasurementEnsemble& ens, double collinearity_tol) {
  const int n = ens.n();
  const int m = ens.m();
  Eigen::MatrixXd d(m, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < m; ++i) d(i, j) = ens.entry(i, j, j);

  S1Certificate cert;
  Eigen::VectorXd norms(n);
  for (int j = 0; j < n; ++j) {
    norms[j] = d.col(j).norm();
    if (norms[j] == 0.0) {
      cert.injective = false;
      cert.zero_diag_index = j;
      return cert;
    }
  }
  for (int j = 0; j < n; ++j) {
    for (int k = j + 1; k < n; ++k) {
      if (d.col(j).dot(d.col(k)) <= 0.0) continue;
      const double gap = (d.col(j) / norms[j] - d.col(k) / norms[k]).norm();
      if (gap <= collinearity_tol) {
        cert.injective = false;
        cert.collinear_pair = {j, k};
        return cert;
      }
    }
  }
  return cert;
}

namespace {

// Residual M(x) - M(z) recomputed from the ensemble kernels.
Eigen::VectorXd collision_residual(const MeasurementEnsemble& ens, const Eigen::VectorXd& x,
                                   const std::vector<int>& I, const Eigen::VectorXd& z,
                                   const std::vector<int>& J) {
  return ens.quad_forms(x, I) - ens.quad_forms(z, J);
}

}  // namespace

CollisionReport collision_search(const MeasurementEnsemble& ens, const std::vector<int>& I,
                                 const std::vector<int>& J, int budget, RngSeed seed,
                                 const CollisionOpts& opts) {
  const int n = ens.n();
  const int m = ens.m();
  if (I.empty() || J.empty()) throw InvalidInput("collision_search: empty support");
  for (int j : I)
    if (j < 0 || j >= n) throw InvalidInput("collision_search: support index out of range");
  for (int j : J)
    if (j < 0 || j >= n) throw InvalidInput("collision_search: support index out of range");

  const int p = static_cast<int>(I.size());
  const int q = static_cast<int>(J.size());

  CollisionReport report;
  report.support_x = I;
  report.support_z = J;
  report.residual = std::numeric_limits<double>::infinity();

  Eigen::VectorXd w_x, w_z;
  for (int t = 0; t < budget; ++t) {
    report.attempts = t + 1;
    SeqRng start(child_seed(seed, static_cast<std::uint64_t>(t)));
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n), z = Eigen::VectorXd::Zero(n);
    for (int j : I) x[j] = start.normal();
    for (int j : J) z[j] = start.normal();

    Eigen::VectorXd r = collision_residual(ens, x, I, z, J);
    double rn2 = r.squaredNorm();
    double lambda = 1e-3;
    const double target = 0.25 * opts.collision_tol;

    for (int it = 0; it < opts.max_lm_iters && rn2 > target * target; ++it) {
      ens.apply_sym(x, I, w_x);
      ens.apply_sym(z, J, w_z);
      Eigen::MatrixXd Jac(m, p + q);
      for (int c = 0; c < p; ++c)
        for (int i = 0; i < m; ++i) Jac(i, c) = w_x[static_cast<Eigen::Index>(i) * n + I[c]];
      for (int c = 0; c < q; ++c)
        for (int i = 0; i < m; ++i) Jac(i, p + c) = -w_z[static_cast<Eigen::Index>(i) * n + J[c]];

      const Eigen::VectorXd g = Jac.transpose() * r;
      if (g.norm() <= 1e-14 * std::max(1.0, std::sqrt(rn2))) break;  // stationary
      const Eigen::MatrixXd gram = Jac.transpose() * Jac;
      const double scale = std::max(gram.diagonal().maxCoeff(), 1e-12);

      bool accepted = false;
      for (int rej = 0; rej < 10 && !accepted; ++rej) {
        Eigen::MatrixXd damped = gram;
        damped.diagonal().array() += lambda * scale;
        Eigen::LLT<Eigen::MatrixXd> llt(damped);
        if (llt.info() != Eigen::Success) {
          lambda *= 10.0;
          continue;
        }
        const Eigen::VectorXd delta = llt.solve(-g);
        Eigen::VectorXd xt = x, zt = z;
        for (int c = 0; c < p; ++c) xt[I[c]] += delta[c];
        for (int c = 0; c < q; ++c) zt[J[c]] += delta[p + c];
        const Eigen::VectorXd rt = collision_residual(ens, xt, I, zt, J);
        const double rt2 = rt.squaredNorm();
        if (rt2 < rn2) {
          x = std::move(xt);
          z = std::move(zt);
          r = rt;
          rn2 = rt2;
          lambda = std::max(lambda / 3.0, 1e-12);
          accepted = true;
        } else {
          lambda *= 10.0;
        }
      }
      if (!accepted) break;  // stuck at a local minimum for this start
    }

    // Re-verify from scratch before accepting.
    const double resid = collision_residual(ens, x, I, z, J).norm();
    const double sep = dist(x, z);
    if (sep >= opts.sep_tol && resid < report.residual) report.residual = resid;
    if (resid <= opts.collision_tol && sep >= opts.sep_tol) {
      report.found = true;
      report.x = x;
      report.z = z;
      report.residual = resid;
      report.separation = sep;
      return report;
    }
  }
  report.x = Eigen::VectorXd::Zero(n);
  report.z = Eigen::VectorXd::Zero(n);
  return report;
}

CollisionReport collision_scan(const MeasurementEnsemble& ens, int s, int budget, RngSeed seed,
                               const CollisionOpts& opts) {
  const int n = ens.n();
  if (s < 1 || s > n) throw InvalidInput("collision_scan: need 1 <= s <= n");

  // Lexicographic s-subsets. The first `budget` pairs in pair order only ever
  // touch the first `budget` subsets, so enumeration is capped there.
  std::vector<std::vector<int>> subs;
  std::vector<int> cur(s);
  for (int j = 0; j < s; ++j) cur[j] = j;
  const int cap = std::max(budget, 1);
  while (true) {
    subs.push_back(cur);
    if (static_cast<int>(subs.size()) >= cap) break;
    int i = s - 1;
    while (i >= 0 && cur[i] == n - s + i) --i;
    if (i < 0) break;
    ++cur[i];
    for (int k = i + 1; k < s; ++k) cur[k] = cur[k - 1] + 1;
  }
  const int ns = static_cast<int>(subs.size());

  CollisionReport best;
  best.residual = std::numeric_limits<double>::infinity();
  best.x = Eigen::VectorXd::Zero(n);
  best.z = Eigen::VectorXd::Zero(n);

  int used = 0;
  std::uint64_t start_id = 0;
  while (used < budget) {
    for (int a = 0; a < ns && used < budget; ++a) {
      for (int b = a; b < ns && used < budget; ++b) {
        CollisionReport r =
            collision_search(ens, subs[a], subs[b], 1, child_seed(seed, start_id++), opts);
        ++used;
        if (r.found) {
          r.attempts = used;
          return r;
        }
        if (r.residual < best.residual) {
          best.residual = r.residual;
          best.support_x = r.support_x;
          best.support_z = r.support_z;
        }
      }
    }
  }
  best.attempts = used;
  return best;
}

}  // namespace sgn
