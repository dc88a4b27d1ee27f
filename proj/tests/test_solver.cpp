#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "sgn/ensemble.hpp"
#include "sgn/errors.hpp"
#include "sgn/metrics.hpp"
#include "sgn/solver.hpp"
#include "sgn/spectral_init.hpp"

using namespace sgn;

namespace {

// Dense Jacobian straight from the definition, one matrix at a time.
Eigen::MatrixXd dense_jacobian(const MeasurementEnsemble& ens, const Eigen::VectorXd& z) {
  const int n = ens.n(), m = ens.m();
  Eigen::MatrixXd J(m, n);
  const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(m));
  for (int i = 0; i < m; ++i) {
    const Eigen::MatrixXd a = ens.matrix(i);
    J.row(i) = inv_sqrt_m * ((a + a.transpose()) * z).transpose();
  }
  return J;
}

Eigen::VectorXd dense_residual_scaled(const MeasurementEnsemble& ens, const Eigen::VectorXd& y,
                                      const Eigen::VectorXd& z) {
  const int m = ens.m();
  Eigen::VectorXd F(m);
  const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(m));
  for (int i = 0; i < m; ++i) F[i] = (z.dot(ens.matrix(i) * z) - y[i]) * inv_sqrt_m;
  return F;
}

MeasurementEnsemble scalar_ensemble(double a) {
  std::vector<Eigen::MatrixXd> mats(1, Eigen::MatrixXd::Constant(1, 1, a));
  return MeasurementEnsemble::from_matrices(mats);
}

}  // namespace

TEST_CASE("gradient matches central differences") {
  const MeasurementEnsemble ens = gen_ensemble(12, 30, RngSeed{501, 0});
  const SparseSignal sig = gen_signal(12, 4, RngSeed{501, 1});
  const Observations obs = measure(ens, sig, NoiseSpec{}, RngSeed{501, 2});

  Eigen::VectorXd z(12);
  for (int j = 0; j < 12; ++j) z[j] = 0.2 * j - 1.0;
  const Eigen::VectorXd g = gradient(ens, obs.y, z);

  const double h = 1e-5;
  for (int j = 0; j < 12; ++j) {
    Eigen::VectorXd zp = z, zm = z;
    zp[j] += h;
    zm[j] -= h;
    const double fd = (objective(ens, obs.y, zp) - objective(ens, obs.y, zm)) / (2.0 * h);
    CHECK(g[j] == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("worked scalar instance: objective, gradient, Gauss-Newton step") {
  const MeasurementEnsemble ens = scalar_ensemble(1.0);
  Eigen::VectorXd y(1), z(1);
  y << 1.0;
  z << 2.0;
  CHECK(objective(ens, y, z) == doctest::Approx(4.5).epsilon(1e-15));
  CHECK(gradient(ens, y, z)[0] == doctest::Approx(12.0).epsilon(1e-15));

  const GnDirection dir = gn_direction(ens, y, z, {0}, 1e-10);
  REQUIRE(dir.ok);
  CHECK(dir.p[0] == doctest::Approx(0.75).epsilon(1e-14));  // z - p = 1.25

  SolverConfig cfg;
  cfg.s = 1;
  cfg.step_mu = 0.01;
  cfg.normalize_step = false;
  const StepOutcome step = sgn_step(ens, y, z, 0.01, cfg);
  CHECK(step.x[0] == doctest::Approx(1.25).epsilon(1e-14));

  cfg.max_iters = 20;
  const SolveResult res = sgn_solve(ens, y, z, cfg);
  CHECK(res.trace.status == TermStatus::converged);
  CHECK(res.trace.iterations <= 6);
  CHECK(std::abs(res.x[0] - 1.0) <= 1e-6);
}

TEST_CASE("hard_threshold keeps the s largest magnitudes, ties to lower index") {
  Eigen::VectorXd v(2);
  v << 2.0, -2.0;
  Eigen::VectorXd t = hard_threshold(v, 1);
  CHECK(t[0] == 2.0);
  CHECK(t[1] == 0.0);

  v << -2.0, 2.0;
  t = hard_threshold(v, 1);
  CHECK(t[0] == -2.0);
  CHECK(t[1] == 0.0);

  Eigen::VectorXd w(4);
  w << 1.0, -3.0, 2.0, -2.0;
  t = hard_threshold(w, 2);
  CHECK(t[0] == 0.0);
  CHECK(t[1] == -3.0);
  CHECK(t[2] == 2.0);
  CHECK(t[3] == 0.0);

  CHECK_THROWS_AS(hard_threshold(w, 0), InvalidInput);
  CHECK_THROWS_AS(hard_threshold(w, 5), InvalidInput);
}

TEST_CASE("threshold_support drops selected exact zeros") {
  Eigen::VectorXd v(4);
  v << 0.0, 0.0, 1.0, 0.0;
  CHECK(threshold_support(v, 2) == std::vector<int>{2});
  CHECK(threshold_support(Eigen::VectorXd::Zero(3), 2).empty());
}

TEST_CASE("jacobian_apply matches the dense Jacobian") {
  const MeasurementEnsemble ens = gen_ensemble(8, 14, RngSeed{502, 0});
  Eigen::VectorXd z = Eigen::VectorXd::Zero(8);
  z[1] = 0.8;
  z[5] = -1.5;
  const std::vector<int> cols{0, 3, 5};
  const Eigen::MatrixXd J = jacobian_apply(ens, z, cols);
  const Eigen::MatrixXd Jd = dense_jacobian(ens, z);
  for (int i = 0; i < 14; ++i)
    for (std::size_t c = 0; c < cols.size(); ++c)
      CHECK(J(i, static_cast<Eigen::Index>(c)) ==
            doctest::Approx(Jd(i, cols[c])).epsilon(1e-12));
}

TEST_CASE("gn_direction matches a dense least-squares oracle") {
  const int n = 10, m = 25;
  const MeasurementEnsemble ens = gen_ensemble(n, m, RngSeed{503, 0});
  const SparseSignal sig = gen_signal(n, 4, RngSeed{503, 1});
  const Observations obs = measure(ens, sig, NoiseSpec{}, RngSeed{503, 2});

  // iterate supported on {1,4,6,9}, target support {1,2,6,7}
  Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
  z[1] = 0.6;
  z[4] = -1.1;
  z[6] = 0.9;
  z[9] = 0.3;
  const std::vector<int> S{1, 2, 6, 7};

  const GnDirection dir = gn_direction(ens, obs.y, z, S, 1e-10);
  REQUIRE(dir.ok);

  const Eigen::MatrixXd Jd = dense_jacobian(ens, z);
  Eigen::MatrixXd JS(m, 4), JD(m, 2);
  for (int c = 0; c < 4; ++c) JS.col(c) = Jd.col(S[c]);
  JD.col(0) = Jd.col(4);  // D = supp(z) \ S = {4, 9}
  JD.col(1) = Jd.col(9);
  Eigen::VectorXd xD(2);
  xD << z[4], z[9];
  const Eigen::VectorXd F = dense_residual_scaled(ens, obs.y, z);
  const Eigen::VectorXd target = F - JD * xD;
  const Eigen::VectorXd p_ref = JS.colPivHouseholderQr().solve(target);

  CHECK((dir.p - p_ref).norm() <= 1e-8 * (1.0 + p_ref.norm()));
}

TEST_CASE("sgn_solve recovers a planted sparse signal from spectral init") {
  const int n = 40, m = 160, s = 3;
  const MeasurementEnsemble ens = gen_ensemble(n, m, RngSeed{601, 0});
  SparseSignal sig;
  sig.s = s;
  sig.support = {3, 20, 35};
  sig.x = Eigen::VectorXd::Zero(n);
  sig.x[3] = 1.5;
  sig.x[20] = -2.0;
  sig.x[35] = 1.0;
  const Observations obs = measure(ens, sig, NoiseSpec{}, RngSeed{601, 2});

  const InitResult init = initialize(ens, obs.y, s);
  SolverConfig cfg;
  cfg.s = s;
  cfg.truth = &sig.x;
  const SolveResult res = sgn_solve(ens, obs.y, init.x0, cfg);
  CHECK(res.trace.status == TermStatus::converged);
  CHECK(rel_error(res.x, sig.x) <= 1e-6);
  CHECK(support_match(res.x, sig.x));
  CHECK(res.trace.iters.front().rel_error ==
        doctest::Approx(rel_error(init.x0, sig.x)).epsilon(1e-12));
  // objective decreases monotonically on this instance
  for (std::size_t k = 1; k < res.trace.iters.size(); ++k)
    CHECK(res.trace.iters[k].objective <= res.trace.iters[k - 1].objective * (1.0 + 1e-12));
}

TEST_CASE("the planted signal is an exact fixed point in the noise-free model") {
  const MeasurementEnsemble ens = gen_ensemble(15, 60, RngSeed{602, 0});
  const SparseSignal sig = gen_signal(15, 3, RngSeed{602, 1});
  const Observations obs = measure(ens, sig, NoiseSpec{}, RngSeed{602, 2});
  SolverConfig cfg;
  cfg.s = 3;
  const SolveResult res = sgn_solve(ens, obs.y, sig.x, cfg);
  CHECK(res.trace.status == TermStatus::converged);
  CHECK(res.trace.iterations == 0);
  CHECK((res.x - sig.x).norm() == 0.0);
}

TEST_CASE("sgn_solve is sign-equivariant in the start") {
  const int n = 20, m = 80, s = 3;
  const MeasurementEnsemble ens = gen_ensemble(n, m, RngSeed{603, 0});
  const SparseSignal sig = gen_signal(n, s, RngSeed{603, 1});
  const Observations obs = measure(ens, sig, NoiseSpec{}, RngSeed{603, 2});
  const InitResult init = initialize(ens, obs.y, s);

  SolverConfig cfg;
  cfg.s = s;
  cfg.max_iters = 12;
  const SolveResult plus = sgn_solve(ens, obs.y, init.x0, cfg);
  const SolveResult minus = sgn_solve(ens, obs.y, Eigen::VectorXd(-init.x0), cfg);
  CHECK((plus.x + minus.x).norm() == 0.0);
  CHECK(plus.trace.status == minus.trace.status);
  CHECK(plus.trace.iterations == minus.trace.iterations);
}

TEST_CASE("solver output is invariant under coordinate relabeling") {
  const int n = 8, m = 40, s = 2;
  const MeasurementEnsemble base = gen_ensemble(n, m, RngSeed{604, 0});
  SparseSignal sig;
  sig.s = s;
  sig.support = {1, 3};
  sig.x = Eigen::VectorXd::Zero(n);
  sig.x[1] = 1.3;
  sig.x[3] = -0.8;
  const Observations obs = measure(base, sig, NoiseSpec{}, RngSeed{604, 2});

  // relabel j -> n-1-j
  std::vector<Eigen::MatrixXd> perm(m, Eigen::MatrixXd(n, n));
  for (int i = 0; i < m; ++i) {
    const Eigen::MatrixXd a = base.matrix(i);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) perm[i](n - 1 - r, n - 1 - c) = a(r, c);
  }
  const MeasurementEnsemble pens = MeasurementEnsemble::from_matrices(perm);

  SolverConfig cfg;
  cfg.s = s;
  const SolveResult ra = sgn_solve(base, obs.y, initialize(base, obs.y, s).x0, cfg);
  const SolveResult rb = sgn_solve(pens, obs.y, initialize(pens, obs.y, s).x0, cfg);
  REQUIRE(ra.trace.status == TermStatus::converged);
  REQUIRE(rb.trace.status == TermStatus::converged);
  Eigen::VectorXd flipped(n);
  for (int j = 0; j < n; ++j) flipped[j] = rb.x[n - 1 - j];
  CHECK(dist(ra.x, flipped) <= 1e-6);
}

TEST_CASE("status bookkeeping") {
  const MeasurementEnsemble ens = gen_ensemble(10, 40, RngSeed{605, 0});
  const SparseSignal sig = gen_signal(10, 2, RngSeed{605, 1});
  const Observations obs = measure(ens, sig, NoiseSpec{}, RngSeed{605, 2});
  const InitResult init = initialize(ens, obs.y, 2);

  SolverConfig cfg;
  cfg.s = 2;
  cfg.max_iters = 0;
  const SolveResult res = sgn_solve(ens, obs.y, init.x0, cfg);
  CHECK(res.trace.status == TermStatus::max_iters);
  CHECK(res.trace.iterations == 0);
  CHECK((res.x - init.x0).norm() == 0.0);
  CHECK(res.trace.iters.size() == 1);

  CHECK(std::string(to_string(TermStatus::converged)) == "converged");
  CHECK(std::string(to_string(TermStatus::numerical_failure)) == "numerical_failure");
}

TEST_CASE("solver input validation") {
  const MeasurementEnsemble ens = gen_ensemble(5, 10, RngSeed{606, 0});
  Eigen::VectorXd y = Eigen::VectorXd::Ones(10);
  SolverConfig cfg;
  cfg.s = 0;
  CHECK_THROWS_AS(sgn_solve(ens, y, Eigen::VectorXd::Ones(5), cfg), InvalidInput);
  cfg.s = 2;
  CHECK_THROWS_AS(sgn_solve(ens, y, Eigen::VectorXd::Zero(5), cfg), InvalidInput);
  CHECK_THROWS_AS(sgn_solve(ens, y, Eigen::VectorXd::Ones(4), cfg), InvalidInput);
}

TEST_CASE("effective_mu scales by the squared norm estimate") {
  Eigen::VectorXd y = Eigen::VectorXd::Constant(4, 16.0);  // phi = 4
  SolverConfig cfg;
  CHECK(effective_mu(y, cfg) == doctest::Approx(0.02).epsilon(1e-14));
  cfg.step_mu = 0.16;
  CHECK(effective_mu(y, cfg) == doctest::Approx(0.01).epsilon(1e-14));
  cfg.normalize_step = false;
  CHECK(effective_mu(y, cfg) == 0.16);
  cfg.normalize_step = true;
  CHECK_THROWS_AS(effective_mu(Eigen::VectorXd::Zero(3), cfg), InvalidInput);
}

TEST_CASE("restricted Gram spectrum sits in the expected band") {
  // E[J_S^T J_S] = 2||z||^2 I + 2 z_S z_S^T on the signal support, so the
  // eigenvalues concentrate inside [2, 4] * ||z||^2 for large m.
  const int n = 16, m = 3000, s = 4;
  const MeasurementEnsemble ens = gen_ensemble(n, m, RngSeed{607, 0}, StorageMode::materialized);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
  z[2] = 0.9;
  z[5] = -1.2;
  z[9] = 0.4;
  z[14] = 1.0;
  const std::vector<int> S{2, 5, 9, 14};
  const Eigen::MatrixXd J = jacobian_apply(ens, z, S);
  const Eigen::MatrixXd G = J.transpose() * J;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(G);
  const double z2 = z.squaredNorm();
  CHECK(eig.eigenvalues().minCoeff() >= (2.0 - 0.5) * z2);
  CHECK(eig.eigenvalues().maxCoeff() <= (4.0 + 0.5) * z2);
}
