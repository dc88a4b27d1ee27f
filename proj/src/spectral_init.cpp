#include "sgn/spectral_init.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sgn/errors.hpp"

namespace sgn {

Eigen::VectorXd marginals(const MeasurementEnsemble& ens, const Eigen::VectorXd& y) {
  const int n = ens.n();
  const int m = ens.m();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < m; ++i) {
    const double yi = y[i];
    if (yi == 0.0) continue;
    for (int j = 0; j < n; ++j) out[j] += yi * ens.entry(i, j, j);
  }
  return out / static_cast<double>(m);
}

std::vector<int> select_support(const Eigen::VectorXd& values, int s) {
  const int n = static_cast<int>(values.size());
  if (s <= 0 || s > n) throw InvalidInput("select_support: need 0 < s <= n");
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::partial_sort(idx.begin(), idx.begin() + s, idx.end(), [&](int a, int b) {
    if (values[a] != values[b]) return values[a] > values[b];
    return a < b;
  });
  std::vector<int> sup(idx.begin(), idx.begin() + s);
  std::sort(sup.begin(), sup.end());
  return sup;
}

std::pair<Eigen::VectorXd, int> restricted_spectral(const MeasurementEnsemble& ens,
                                                    const Eigen::VectorXd& y,
                                                    const std::vector<int>& support,
                                                    const PowerOpts& opts) {
  const int n = ens.n();
  const int m = ens.m();
  const int k = static_cast<int>(support.size());
  if (k == 0) throw InvalidInput("restricted_spectral: empty support");

  Eigen::MatrixXd ys = Eigen::MatrixXd::Zero(k, k);
  for (int i = 0; i < m; ++i) {
    const double yi = y[i];
    if (yi == 0.0) continue;
    for (int r = 0; r < k; ++r)
      for (int c = 0; c < k; ++c) ys(r, c) += yi * ens.entry(i, support[r], support[c]);
  }
  ys /= static_cast<double>(m);

  const Eigen::MatrixXd g = ys * ys.transpose();  // power iteration target
  Eigen::VectorXd v = Eigen::VectorXd::Constant(k, 1.0 / std::sqrt(static_cast<double>(k)));
  const int cap = opts.max_iters > 0 ? opts.max_iters : 10 * k + 100;
  int used = 0;
  // The cap also covers near-degenerate leading pairs, where the iteration
  // drifts inside the top eigenspace; the last iterate is as good a direction
  // as any there, so running out of iterations is not an error.
  if (g.norm() != 0.0) {
    for (used = 1; used <= cap; ++used) {
      Eigen::VectorXd next = g * v;
      const double norm = next.norm();
      if (norm == 0.0) break;  // v landed in the null space; stationary
      next /= norm;
      const double delta = std::min((next - v).norm(), (next + v).norm());
      v = next;
      if (delta <= opts.tol) break;
    }
    used = std::min(used, cap);
  }

  // Sign convention: largest-magnitude coordinate positive, ties lowest index.
  int arg = 0;
  for (int j = 1; j < k; ++j)
    if (std::abs(v[j]) > std::abs(v[arg])) arg = j;
  if (v[arg] < 0.0) v = -v;

  Eigen::VectorXd full = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < k; ++j) full[support[j]] = v[j];
  return {full, used};
}

double norm_estimate(const Eigen::VectorXd& y, PhiConvention conv) {
  const double c = conv == PhiConvention::inv_m ? 1.0 : 2.0;
  const double ms = y.squaredNorm() / (c * static_cast<double>(y.size()));
  return std::pow(ms, 0.25);
}

InitResult initialize(const MeasurementEnsemble& ens, const Eigen::VectorXd& y, int s,
                      PhiConvention conv, const PowerOpts& opts) {
  InitResult res;
  res.marginals = marginals(ens, y);
  res.support = select_support(res.marginals, s);
  auto [v, iters] = restricted_spectral(ens, y, res.support, opts);
  res.power_iters = iters;
  res.phi = norm_estimate(y, conv);
  res.x0 = res.phi * v;
  return res;
}

}  // namespace sgn
