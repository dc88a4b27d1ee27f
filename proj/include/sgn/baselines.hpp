#pragma once

#include <Eigen/Dense>

#include "sgn/ensemble.hpp"
#include "sgn/solver.hpp"
#include "sgn/spectral_init.hpp"

// Proxy baselines sharing the measurement model: plain gradient descent on
// the least-squares objective (wf), its hard-thresholded variant (iht), and
// the thresholded-marginal initializer (tsi).

namespace sgn {

struct BaselineConfig {
  std::optional<double> step_mu;  // same convention as SolverConfig::step_mu
  bool normalize_step = true;
  int s = 0;  // iht only
  int max_iters = 2000;
  double tol_residual = 1e-12;
  double tol_stagnation = 1e-14;
  double divergence_factor = 1e6;  // objective blow-up relative to start
  PhiConvention phi_conv = PhiConvention::inv_m;
  bool record_support = false;
  const Eigen::VectorXd* truth = nullptr;
};

SolveResult wf_solve(const MeasurementEnsemble& ens, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& x0, const BaselineConfig& cfg);

SolveResult iht_solve(const MeasurementEnsemble& ens, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& x0, const BaselineConfig& cfg);

// Thresholded support rule: S = {j : Y_jj > alpha * phi^2 * sqrt(log(n)/m)}
// (natural log), falling back to the single largest marginal when empty.
InitResult tsi_init(const MeasurementEnsemble& ens, const Eigen::VectorXd& y, double alpha,
                    PhiConvention conv = PhiConvention::inv_m, const PowerOpts& opts = {});

}  // namespace sgn
