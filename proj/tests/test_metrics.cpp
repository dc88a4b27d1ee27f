#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "sgn/errors.hpp"
#include "sgn/metrics.hpp"

using namespace sgn;

TEST_CASE("dist minimizes over the sign flip") {
  Eigen::VectorXd a(2), b(2);
  a << 1.0, 2.0;
  b << -1.0, -2.0;
  CHECK(dist(a, b) == 0.0);
  b << 0.0, 2.0;
  CHECK(dist(a, b) == doctest::Approx(1.0).epsilon(1e-15));
  a << 1.0, 0.0;
  b << 0.0, 1.0;
  CHECK(dist(a, b) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("rel_error normalizes by the reference and rejects zero") {
  Eigen::VectorXd x(2), xhat(2);
  x << 3.0, 4.0;
  xhat << -3.0, -4.0;
  CHECK(rel_error(xhat, x) == 0.0);
  xhat << 3.0, 4.5;
  CHECK(rel_error(xhat, x) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK_THROWS_AS(rel_error(xhat, Eigen::VectorXd::Zero(2)), InvalidInput);
}

TEST_CASE("support comparisons") {
  Eigen::VectorXd x(4), xhat(4);
  x << 0.0, 1.0, 0.0, -2.0;
  xhat << 0.0, 5.0, 0.0, 1e-9;
  CHECK(support_match(xhat, x));
  CHECK_FALSE(support_match_eps(xhat, x, 1e-6));  // 1e-9 entry drops out of xhat
  xhat[3] = 0.0;
  CHECK_FALSE(support_match(xhat, x));
  Eigen::VectorXd tiny = x;
  tiny[3] = 1e-12;
  CHECK(support_match_eps(tiny, x, 1e-15));
}
