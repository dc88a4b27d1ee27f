#include "sgn/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sgn/errors.hpp"
#include "sgn/metrics.hpp"

namespace sgn {

namespace {

SolveResult descend(const MeasurementEnsemble& ens, const Eigen::VectorXd& y,
                    const Eigen::VectorXd& x0, const BaselineConfig& cfg, bool threshold) {
  if (x0.size() != ens.n()) throw InvalidInput("baseline solve: x0 has wrong dimension");
  if (x0.norm() == 0.0) throw InvalidInput("baseline solve: x0 is zero");
  if (threshold && (cfg.s <= 0 || cfg.s > ens.n())) throw InvalidInput("iht_solve: need 0 < s <= n");

  SolverConfig muc;
  muc.step_mu = cfg.step_mu;
  muc.normalize_step = cfg.normalize_step;
  muc.phi_conv = cfg.phi_conv;
  const double mu_eff = effective_mu(y, muc);

  SolveResult res;
  res.trace.phi = norm_estimate(y, cfg.phi_conv);
  res.trace.mu_effective = mu_eff;

  const int n = ens.n();
  const int m = ens.m();
  Eigen::VectorXd z = x0;
  std::vector<int> T = nonzero_support(z);
  Eigen::VectorXd w;
  double f0 = 0.0;
  bool pending_stagnation = false;

  for (int k = 0;; ++k) {
    ens.apply_sym(z, T, w);
    Eigen::VectorXd yhat(m);
    for (int i = 0; i < m; ++i) {
      const Eigen::Index base = static_cast<Eigen::Index>(i) * n;
      double acc = 0.0;
      for (int j : T) acc += z[j] * w[base + j];
      yhat[i] = 0.5 * acc;
    }
    const Eigen::VectorXd r = yhat - y;
    const double f = r.squaredNorm() / (2.0 * m);
    if (k == 0) f0 = f;

    IterRecord rec;
    rec.k = k;
    rec.objective = f;
    rec.residual_norm = std::sqrt(2.0 * f);
    if (cfg.truth != nullptr) rec.rel_error = rel_error(z, *cfg.truth);
    if (cfg.record_support) rec.support = T;
    res.trace.iters.push_back(std::move(rec));

    if (f <= cfg.tol_residual) {
      res.trace.status = TermStatus::converged;
      res.trace.iterations = k;
      break;
    }
    if (f > cfg.divergence_factor * std::max(f0, std::numeric_limits<double>::min())) {
      res.trace.status = TermStatus::diverged;
      res.trace.iterations = k;
      break;
    }
    if (pending_stagnation) {
      res.trace.status = TermStatus::stagnated;
      res.trace.iterations = k;
      break;
    }
    if (k == cfg.max_iters) {
      res.trace.status = TermStatus::max_iters;
      res.trace.iterations = k;
      break;
    }

    Eigen::Map<const Eigen::MatrixXd> W(w.data(), n, m);
    Eigen::VectorXd next = z - (mu_eff / static_cast<double>(m)) * (W * r);
    if (threshold) next = hard_threshold(next, cfg.s);
    const double denom = std::max(z.norm(), std::numeric_limits<double>::min());
    if ((next - z).norm() / denom <= cfg.tol_stagnation) pending_stagnation = true;
    z = std::move(next);
    if (threshold) {
      T = nonzero_support(z);
    } else if (static_cast<int>(T.size()) != n) {
      // Gradient steps are dense from the first iteration on.
      T.resize(n);
      std::iota(T.begin(), T.end(), 0);
    }
  }
  res.x = z;
  return res;
}

}  // namespace

SolveResult wf_solve(const MeasurementEnsemble& ens, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& x0, const BaselineConfig& cfg) {
  return descend(ens, y, x0, cfg, false);
}

SolveResult iht_solve(const MeasurementEnsemble& ens, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& x0, const BaselineConfig& cfg) {
  return descend(ens, y, x0, cfg, true);
}

InitResult tsi_init(const MeasurementEnsemble& ens, const Eigen::VectorXd& y, double alpha,
                    PhiConvention conv, const PowerOpts& opts) {
  InitResult res;
  res.marginals = marginals(ens, y);
  res.phi = norm_estimate(y, conv);
  const double tau =
      alpha * res.phi * res.phi * std::sqrt(std::log(static_cast<double>(ens.n())) / ens.m());
  for (int j = 0; j < ens.n(); ++j)
    if (res.marginals[j] > tau) res.support.push_back(j);
  if (res.support.empty()) {
    // Everything below threshold: fall back to the single largest marginal.
    int arg = 0;
    for (int j = 1; j < ens.n(); ++j)
      if (res.marginals[j] > res.marginals[arg]) arg = j;
    res.support.push_back(arg);
  }
  auto [v, iters] = restricted_spectral(ens, y, res.support, opts);
  res.power_iters = iters;
  res.x0 = res.phi * v;
  return res;
}

}  // namespace sgn
