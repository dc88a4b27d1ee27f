#pragma once

#include <Eigen/Dense>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sgn/ensemble.hpp"
#include "sgn/spectral_init.hpp"

// Support-restricted Gauss-Newton refinement. Each iteration picks the next
// support from one hard-thresholded gradient step,
//   S = supp(H_s(x - mu * grad f(x))),
// then solves the Gauss-Newton normal equations restricted to S,
//   [J_S^T J_S] p = grad_S f(x) - J_S^T J_D(x) x_D,   D = supp(x) \ S,
// and updates x_S <- x_S - p with everything off S set to exact zero.
// J(z) has rows (1/sqrt m) ((A_i + A_i^T) z)^T and grad f = J^T F with
// F_i = (z^T A_i z - y_i)/sqrt(m).

namespace sgn {

enum class TermStatus { converged, max_iters, stagnated, numerical_failure, diverged };
const char* to_string(TermStatus status);

struct SolverConfig {
  int s = 0;
  // Step scale for the support-selection gradient step. Interpreted as
  // mu * phi^2 (dimensionless); the effective step is step_mu / phi^2 with
  // phi = norm_estimate(y). Unset -> 0.32, the center of the feasible window.
  std::optional<double> step_mu;
  bool normalize_step = true;  // false: step_mu is the literal step size
  int max_iters = 200;
  double tol_residual = 1e-12;    // stop when the objective falls below this
  double tol_stagnation = 1e-14;  // relative iterate change
  double jitter = 1e-10;          // one-shot diagonal boost on LLT failure
  PhiConvention phi_conv = PhiConvention::inv_m;
  bool record_support = true;
  const Eigen::VectorXd* truth = nullptr;  // fills rel_error in the trace
};

struct IterRecord {
  int k = 0;
  double objective = 0.0;
  double residual_norm = 0.0;  // ||F(x_k)||
  double rel_error = std::numeric_limits<double>::quiet_NaN();
  bool jitter_used = false;
  std::vector<int> support;
};

struct SolveTrace {
  std::vector<IterRecord> iters;
  TermStatus status = TermStatus::max_iters;
  int iterations = 0;
  double phi = 0.0;
  double mu_effective = 0.0;
  std::string message;
};

struct SolveResult {
  Eigen::VectorXd x;
  SolveTrace trace;
};

Eigen::VectorXd gradient(const MeasurementEnsemble& ens, const Eigen::VectorXd& y,
                         const Eigen::VectorXd& z);

// Keep the s largest-magnitude entries (ties to the lowest index), zero the rest.
Eigen::VectorXd hard_threshold(const Eigen::VectorXd& v, int s);

// supp(H_s(v)): selected indices whose value is nonzero, ascending.
std::vector<int> threshold_support(const Eigen::VectorXd& v, int s);

// m x |cols| matrix with entries (1/sqrt m) ((A_i + A_i^T) z)_{cols[c]}.
Eigen::MatrixXd jacobian_apply(const MeasurementEnsemble& ens, const Eigen::VectorXd& z,
                               const std::vector<int>& cols);

struct GnDirection {
  Eigen::VectorXd p;  // |S| coefficients
  bool jitter_used = false;
  bool ok = true;
  std::string message;
};

// Normal-equation solve for the direction on S at iterate z.
GnDirection gn_direction(const MeasurementEnsemble& ens, const Eigen::VectorXd& y,
                         const Eigen::VectorXd& z, const std::vector<int>& S, double jitter);

struct StepOutcome {
  Eigen::VectorXd x;
  std::vector<int> support;
  bool jitter_used = false;
  bool degenerate = false;  // thresholded gradient step vanished entirely
  bool failed = false;
  std::string message;
};

// One full SGN iteration (support selection + restricted Gauss-Newton update).
StepOutcome sgn_step(const MeasurementEnsemble& ens, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& z, double mu_effective, const SolverConfig& cfg);

SolveResult sgn_solve(const MeasurementEnsemble& ens, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& x0, const SolverConfig& cfg);

// Effective gradient step size for observations y under cfg's conventions.
double effective_mu(const Eigen::VectorXd& y, const SolverConfig& cfg);

}  // namespace sgn
