#pragma once

#include <Eigen/Dense>
#include <vector>

#include "sgn/ensemble.hpp"

// Spectral initialization. Diagonal marginals Y_jj = (1/m) sum_i y_i (A_i)_jj
// concentrate around x_j^2; the s largest marginals give a support estimate
// S, and the leading left singular vector of Y_S = (1/m) sum_i y_i [A_i]_{S,S}
// gives the direction, scaled by the norm estimate phi.

namespace sgn {

// Normalization of phi = (sum y_i^2 / (c*m))^{1/4}: c = 1 (default) or c = 2.
// The default makes E[phi] track ||x||.
enum class PhiConvention { inv_m, inv_2m };

struct PowerOpts {
  double tol = 1e-10;
  int max_iters = 0;  // 0: use 10*|S| + 100
};

struct InitResult {
  Eigen::VectorXd x0;          // length n, supported on `support`
  std::vector<int> support;    // ascending
  double phi = 0.0;
  Eigen::VectorXd marginals;   // length n
  int power_iters = 0;
};

Eigen::VectorXd marginals(const MeasurementEnsemble& ens, const Eigen::VectorXd& y);

// Indices of the s largest values (signed); ties resolved to the lowest index.
std::vector<int> select_support(const Eigen::VectorXd& values, int s);

// Leading left singular vector of Y_S, embedded in R^n on `support`; unit
// norm, sign fixed so the largest-magnitude coordinate is positive.
// Returns the vector and the number of power iterations used.
std::pair<Eigen::VectorXd, int> restricted_spectral(const MeasurementEnsemble& ens,
                                                    const Eigen::VectorXd& y,
                                                    const std::vector<int>& support,
                                                    const PowerOpts& opts = {});

double norm_estimate(const Eigen::VectorXd& y, PhiConvention conv = PhiConvention::inv_m);

InitResult initialize(const MeasurementEnsemble& ens, const Eigen::VectorXd& y, int s,
                      PhiConvention conv = PhiConvention::inv_m, const PowerOpts& opts = {});

}  // namespace sgn
