#include "sgn/metrics.hpp"

#include <algorithm>

#include "sgn/ensemble.hpp"
#include "sgn/errors.hpp"

namespace sgn {

double dist(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return std::min((a - b).norm(), (a + b).norm());
}

double rel_error(const Eigen::VectorXd& xhat, const Eigen::VectorXd& x) {
  const double nx = x.norm();
  if (nx == 0.0) throw InvalidInput("rel_error: reference signal is zero");
  return dist(xhat, x) / nx;
}

bool support_match(const Eigen::VectorXd& xhat, const Eigen::VectorXd& x) {
  return nonzero_support(xhat) == nonzero_support(x);
}

bool support_match_eps(const Eigen::VectorXd& xhat, const Eigen::VectorXd& x, double eps) {
  std::vector<int> a, b;
  for (int j = 0; j < xhat.size(); ++j)
    if (std::abs(xhat[j]) > eps) a.push_back(j);
  for (int j = 0; j < x.size(); ++j)
    if (std::abs(x[j]) > eps) b.push_back(j);
  return a == b;
}

}  // namespace sgn
