#pragma once

#include <Eigen/Dense>
#include <vector>

#include "sgn/ensemble.hpp"
#include "sgn/rng.hpp"

// Identifiability probes for the quadratic measurement map
// M(x) = (x^T A_1 x, ..., x^T A_m x).
//
// For 1-sparse signals M(t e_j) = t^2 d_j with d_j = ((A_1)_jj, ..., (A_m)_jj),
// so M is injective on 1-sparse signals up to sign iff every d_j is nonzero
// and no pair d_j, d_k is positively proportional. For general s the probe
// searches numerically for a collision pair x != +-z with M(x) = M(z) on
// prescribed supports.

namespace sgn {

struct S1Certificate {
  bool injective = true;
  int zero_diag_index = -1;              // witness: d_j == 0
  std::pair<int, int> collinear_pair{-1, -1};  // witness: d_k = c d_j, c > 0
};

S1Certificate s1_injectivity_check(const MeasurementEnsemble& ens, double collinearity_tol = 1e-12);

struct CollisionOpts {
  double collision_tol = 1e-8;  // verified ||M(x) - M(z)|| at which a pair counts
  double sep_tol = 1e-3;        // minimum dist(x, z); filters x ~ +-z
  int max_lm_iters = 80;
};

struct CollisionReport {
  bool found = false;
  Eigen::VectorXd x;            // length n
  Eigen::VectorXd z;
  double residual = 0.0;        // verified ||M(x) - M(z)|| of the reported pair,
                                // or the best verified value seen when not found
  double separation = 0.0;
  std::vector<int> support_x;
  std::vector<int> support_z;
  int attempts = 0;
};

// Levenberg-Marquardt search for a collision with supp(x) in I, supp(z) in J,
// from `budget` random starts drawn off `seed` (start t uses child(seed, t)).
CollisionReport collision_search(const MeasurementEnsemble& ens, const std::vector<int>& I,
                                 const std::vector<int>& J, int budget, RngSeed seed,
                                 const CollisionOpts& opts = {});

// Collision search over support pairs: s-subsets are enumerated in
// lexicographic order and unordered pairs (I, J), I <= J, get one start per
// round until `budget` starts are spent or a collision is found. A single
// fixed pair can be unlucky (both restricted forms definite with opposite
// signs blocks it); scanning pairs is what the dimension count is about.
CollisionReport collision_scan(const MeasurementEnsemble& ens, int s, int budget, RngSeed seed,
                               const CollisionOpts& opts = {});

}  // namespace sgn
