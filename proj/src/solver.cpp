#include "sgn/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sgn/errors.hpp"
#include "sgn/metrics.hpp"

namespace sgn {

const char* to_string(TermStatus status) {
  switch (status) {
    case TermStatus::converged: return "converged";
    case TermStatus::max_iters: return "max_iters";
    case TermStatus::stagnated: return "stagnated";
    case TermStatus::numerical_failure: return "numerical_failure";
    case TermStatus::diverged: return "diverged";
  }
  return "unknown";
}

namespace {

// Everything one iteration needs from the measurement operator, computed from
// a single pass: w = stacked (A_i + A_i^T) z, predictions, residuals.
struct Kernel {
  Eigen::VectorXd w;     // (m*n), block i holds (A_i + A_i^T) z
  Eigen::VectorXd yhat;  // z^T A_i z
  Eigen::VectorXd r;     // yhat - y
  double f = 0.0;

  void compute(const MeasurementEnsemble& ens, const Eigen::VectorXd& y, const Eigen::VectorXd& z,
               const std::vector<int>& support) {
    const int n = ens.n();
    const int m = ens.m();
    ens.apply_sym(z, support, w);
    yhat.resize(m);
    for (int i = 0; i < m; ++i) {
      const Eigen::Index base = static_cast<Eigen::Index>(i) * n;
      double acc = 0.0;
      for (int j : support) acc += z[j] * w[base + j];
      yhat[i] = 0.5 * acc;
    }
    r = yhat - y;
    f = r.squaredNorm() / (2.0 * m);
  }

  Eigen::VectorXd grad(int n, int m) const {
    Eigen::Map<const Eigen::MatrixXd> W(w.data(), n, m);
    return (W * r) / static_cast<double>(m);
  }

  Eigen::MatrixXd jac_cols(int n, int m, const std::vector<int>& cols) const {
    Eigen::MatrixXd J(m, static_cast<Eigen::Index>(cols.size()));
    const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(m));
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const int j = cols[c];
      for (int i = 0; i < m; ++i) J(i, static_cast<Eigen::Index>(c)) = w[static_cast<Eigen::Index>(i) * n + j] * inv_sqrt_m;
    }
    return J;
  }
};

// Sorted set difference a \ b.
std::vector<int> set_minus(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

GnDirection gn_from_kernel(const Kernel& kern, const MeasurementEnsemble& ens,
                           const Eigen::VectorXd& z, const std::vector<int>& z_support,
                           const std::vector<int>& S, double jitter) {
  GnDirection out;
  const int n = ens.n();
  const int m = ens.m();
  const Eigen::MatrixXd J = kern.jac_cols(n, m, S);
  const Eigen::VectorXd g = kern.grad(n, m);

  Eigen::VectorXd rhs(S.size());
  for (std::size_t c = 0; c < S.size(); ++c) rhs[static_cast<Eigen::Index>(c)] = g[S[c]];

  // Cross term J_D z_D over the old support's leftover entries.
  const std::vector<int> D = set_minus(z_support, S);
  if (!D.empty()) {
    Eigen::VectorXd cross = Eigen::VectorXd::Zero(m);
    const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(m));
    for (int j : D) {
      const double zj = z[j];
      if (zj == 0.0) continue;
      for (int i = 0; i < m; ++i) cross[i] += kern.w[static_cast<Eigen::Index>(i) * n + j] * zj * inv_sqrt_m;
    }
    rhs.noalias() -= J.transpose() * cross;
  }

  Eigen::MatrixXd G = J.transpose() * J;
  Eigen::LLT<Eigen::MatrixXd> llt(G);
  bool jitter_used = false;
  if (llt.info() != Eigen::Success) {
    const double boost = jitter * G.diagonal().maxCoeff();
    G.diagonal().array() += boost;
    llt.compute(G);
    jitter_used = true;
    if (llt.info() != Eigen::Success) {
      out.ok = false;
      out.jitter_used = true;
      out.message = "gn_direction: normal equations not positive definite after jitter";
      return out;
    }
  }
  out.p = llt.solve(rhs);
  out.jitter_used = jitter_used;
  return out;
}

}  // namespace

Eigen::VectorXd gradient(const MeasurementEnsemble& ens, const Eigen::VectorXd& y,
                         const Eigen::VectorXd& z) {
  Kernel kern;
  kern.compute(ens, y, z, nonzero_support(z));
  return kern.grad(ens.n(), ens.m());
}

Eigen::VectorXd hard_threshold(const Eigen::VectorXd& v, int s) {
  const int n = static_cast<int>(v.size());
  if (s <= 0 || s > n) throw InvalidInput("hard_threshold: need 0 < s <= n");
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::partial_sort(idx.begin(), idx.begin() + s, idx.end(), [&](int a, int b) {
    const double fa = std::abs(v[a]), fb = std::abs(v[b]);
    if (fa != fb) return fa > fb;
    return a < b;
  });
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (int t = 0; t < s; ++t) out[idx[t]] = v[idx[t]];
  return out;
}

std::vector<int> threshold_support(const Eigen::VectorXd& v, int s) {
  return nonzero_support(hard_threshold(v, s));
}

Eigen::MatrixXd jacobian_apply(const MeasurementEnsemble& ens, const Eigen::VectorXd& z,
                               const std::vector<int>& cols) {
  Eigen::VectorXd w;
  ens.apply_sym(z, nonzero_support(z), w);
  const int n = ens.n();
  const int m = ens.m();
  Eigen::MatrixXd J(m, static_cast<Eigen::Index>(cols.size()));
  const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(m));
  for (std::size_t c = 0; c < cols.size(); ++c)
    for (int i = 0; i < m; ++i)
      J(i, static_cast<Eigen::Index>(c)) = w[static_cast<Eigen::Index>(i) * n + cols[c]] * inv_sqrt_m;
  return J;
}

GnDirection gn_direction(const MeasurementEnsemble& ens, const Eigen::VectorXd& y,
                         const Eigen::VectorXd& z, const std::vector<int>& S, double jitter) {
  Kernel kern;
  const std::vector<int> T = nonzero_support(z);
  kern.compute(ens, y, z, T);
  return gn_from_kernel(kern, ens, z, T, S, jitter);
}

double effective_mu(const Eigen::VectorXd& y, const SolverConfig& cfg) {
  const double mu = cfg.step_mu.value_or(0.32);
  if (!cfg.normalize_step) return mu;
  const double phi = norm_estimate(y, cfg.phi_conv);
  if (phi == 0.0) throw InvalidInput("effective_mu: zero norm estimate, cannot scale the step");
  return mu / (phi * phi);
}

StepOutcome sgn_step(const MeasurementEnsemble& ens, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& z, double mu_effective, const SolverConfig& cfg) {
  StepOutcome out;
  const std::vector<int> T = nonzero_support(z);
  Kernel kern;
  kern.compute(ens, y, z, T);

  const Eigen::VectorXd u = z - mu_effective * kern.grad(ens.n(), ens.m());
  out.support = threshold_support(u, cfg.s);
  if (out.support.empty()) {
    out.degenerate = true;
    out.x = Eigen::VectorXd::Zero(ens.n());
    return out;
  }
  const GnDirection dir = gn_from_kernel(kern, ens, z, T, out.support, cfg.jitter);
  if (!dir.ok) {
    out.failed = true;
    out.message = dir.message;
    out.x = z;
    return out;
  }
  out.jitter_used = dir.jitter_used;
  out.x = Eigen::VectorXd::Zero(ens.n());
  for (std::size_t c = 0; c < out.support.size(); ++c) {
    const int j = out.support[c];
    out.x[j] = z[j] - dir.p[static_cast<Eigen::Index>(c)];
  }
  return out;
}

SolveResult sgn_solve(const MeasurementEnsemble& ens, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& x0, const SolverConfig& cfg) {
  if (cfg.s <= 0 || cfg.s > ens.n()) throw InvalidInput("sgn_solve: need 0 < s <= n");
  if (x0.size() != ens.n()) throw InvalidInput("sgn_solve: x0 has wrong dimension");
  if (x0.norm() == 0.0) throw InvalidInput("sgn_solve: x0 is zero (Jacobian vanishes)");

  SolveResult res;
  res.trace.phi = norm_estimate(y, cfg.phi_conv);
  const double mu_eff = effective_mu(y, cfg);
  res.trace.mu_effective = mu_eff;

  Eigen::VectorXd z = x0;
  std::vector<int> T = nonzero_support(z);
  Kernel kern;
  bool pending_stagnation = false;
  bool pending_jitter = false;

  for (int k = 0;; ++k) {
    kern.compute(ens, y, z, T);
    IterRecord rec;
    rec.k = k;
    rec.objective = kern.f;
    rec.residual_norm = std::sqrt(2.0 * kern.f);
    rec.jitter_used = pending_jitter;
    if (cfg.truth != nullptr) rec.rel_error = rel_error(z, *cfg.truth);
    if (cfg.record_support) rec.support = T;
    res.trace.iters.push_back(std::move(rec));

    if (kern.f <= cfg.tol_residual) {
      res.trace.status = TermStatus::converged;
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

    const Eigen::VectorXd u = z - mu_eff * kern.grad(ens.n(), ens.m());
    std::vector<int> S = threshold_support(u, cfg.s);
    if (S.empty()) {
      // Thresholded gradient step vanished: the method has nothing to refine.
      z = Eigen::VectorXd::Zero(ens.n());
      T.clear();
      pending_stagnation = true;
      pending_jitter = false;
      continue;
    }
    const GnDirection dir = gn_from_kernel(kern, ens, z, T, S, cfg.jitter);
    if (!dir.ok) {
      res.trace.status = TermStatus::numerical_failure;
      res.trace.iterations = k;
      res.trace.message = dir.message;
      break;
    }
    Eigen::VectorXd next = Eigen::VectorXd::Zero(ens.n());
    for (std::size_t c = 0; c < S.size(); ++c) next[S[c]] = z[S[c]] - dir.p[static_cast<Eigen::Index>(c)];
    const double denom = std::max(z.norm(), std::numeric_limits<double>::min());
    if ((next - z).norm() / denom <= cfg.tol_stagnation) pending_stagnation = true;
    pending_jitter = dir.jitter_used;
    z = std::move(next);
    T = std::move(S);
  }
  res.x = z;
  return res;
}

}  // namespace sgn
