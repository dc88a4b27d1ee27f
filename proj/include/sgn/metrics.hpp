#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

// Recovery is only defined up to global sign, so every error metric
// minimizes over the sign flip.

namespace sgn {

// min(||a - b||, ||a + b||)
double dist(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// dist(xhat, x) / ||x||; requires x != 0.
double rel_error(const Eigen::VectorXd& xhat, const Eigen::VectorXd& x);

// Exact set equality of nonzero supports.
bool support_match(const Eigen::VectorXd& xhat, const Eigen::VectorXd& x);

// Set equality of {j : |v_j| > eps}.
bool support_match_eps(const Eigen::VectorXd& xhat, const Eigen::VectorXd& x, double eps);

struct TrialOutcome {
  std::string method;
  double rel_error = 0.0;
  double dist = 0.0;
  int iterations = 0;
  bool success = false;
  bool support_exact = false;
  std::string status;
  double wall_ms = 0.0;    // informational, excluded from determinism contracts
  double sigma = 0.0;      // noise scale used (noise sweeps)
  std::vector<double> rel_error_curve;  // per-iteration, convergence sweeps only
};

}  // namespace sgn
