#include <catch2/catch_amalgamated.hpp>

#include "netbridge/ellipsoid.hpp"
#include "netbridge/verify.hpp"

using namespace netbridge;

namespace {

Eigen::VectorXd vec2(double x, double y) {
  Eigen::VectorXd v(2);
  v << x, y;
  return v;
}

// Plain triple loop, deliberately naive.
double quadratic_form_oracle(const Eigen::MatrixXd& p, const Eigen::VectorXd& d) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    for (Eigen::Index j = 0; j < d.size(); ++j) acc += d[i] * p(i, j) * d[j];
  }
  return acc;
}

}  // namespace

TEST_CASE("p_norm_sq hand cases") {
  CHECK(p_norm_sq(SpdMatrix::identity(2), vec2(3.0, 4.0), vec2(0.0, 0.0)) == 25.0);
  Eigen::MatrixXd d(2, 2);
  d << 4.0, 0.0, 0.0, 1.0;
  CHECK(p_norm_sq(SpdMatrix(d), vec2(1.0, 0.0), vec2(0.0, 0.0)) == 4.0);
  CHECK_THROWS_AS(p_norm_sq(SpdMatrix::identity(2), Eigen::VectorXd::Zero(3), vec2(0, 0)),
                  DimensionMismatch);
}

TEST_CASE("p_norm_sq matches the naive triple product on random SPD matrices") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 4;
    const SpdMatrix p = random_spd(n, rng);
    Eigen::VectorXd x(n), c(n);
    for (int i = 0; i < n; ++i) {
      x[i] = rng.uniform(-2.0, 2.0);
      c[i] = rng.uniform(-2.0, 2.0);
    }
    const double expected = quadratic_form_oracle(p.entries(), x - c);
    CHECK(p_norm_sq(p, x, c) == Catch::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("contains is closed at the boundary") {
  const Ellipsoid e(vec2(0.0, 0.0), SpdMatrix::identity(2), 1.0);
  CHECK(contains(e, vec2(0.0, 0.0)));
  CHECK(contains(e, vec2(1.0, 0.0)));
  CHECK_FALSE(contains(e, vec2(1.0001, 0.0)));
}

TEST_CASE("spd validation rejects asymmetry and indefiniteness") {
  Eigen::MatrixXd asym(2, 2);
  asym << 1.0, 1e-6, 0.0, 1.0;
  CHECK_THROWS_AS(SpdMatrix(asym), SpdViolation);
  Eigen::MatrixXd indef(2, 2);
  indef << 1.0, 0.0, 0.0, -1.0;
  CHECK_THROWS_AS(SpdMatrix(indef), SpdViolation);
}

TEST_CASE("intersection hand cases") {
  const SpdMatrix eye = SpdMatrix::identity(2);
  CHECK(ellipsoids_intersect(eye, 1.0, vec2(0, 0), vec2(0, 0)));
  CHECK_FALSE(ellipsoids_intersect(eye, 1.0, vec2(0, 0), vec2(3, 0)));
  CHECK(oracle_intersect_grid2d(eye, 1.0, {0.0, 0.0}, {3.0, 0.0}) == false);
  // tangency: distance exactly 2 sqrt(c)
  CHECK(ellipsoids_intersect(eye, 1.0, vec2(0, 0), vec2(2, 0)));
}

TEST_CASE("intersection is symmetric and scale invariant") {
  Rng rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + trial % 3;
    const SpdMatrix p = random_spd(n, rng);
    Eigen::VectorXd a(n), b(n);
    for (int i = 0; i < n; ++i) {
      a[i] = rng.uniform(-1.0, 1.0);
      b[i] = rng.uniform(-1.0, 1.0);
    }
    const double c = rng.uniform(0.1, 2.0);
    const bool ij = ellipsoids_intersect(p, c, a, b);
    CHECK(ij == ellipsoids_intersect(p, c, b, a));
    const double k = rng.uniform(0.2, 5.0);
    const SpdMatrix pk(k * p.entries());
    CHECK(ij == ellipsoids_intersect(pk, k * c, a, b));
  }
}

TEST_CASE("intersection ellipsoid endpoints and tangency midpoint") {
  const SpdMatrix eye = SpdMatrix::identity(2);
  const Eigen::VectorXd ci = vec2(0.0, 0.0);
  const Eigen::VectorXd cj = vec2(2.0, 0.0);

  auto [m0, k0] = intersection_ellipsoid(eye, 1.0, ci, cj, 0.0);
  CHECK(m0 == cj);
  CHECK(k0 == 1.0);
  auto [m1, k1] = intersection_ellipsoid(eye, 1.0, ci, cj, 1.0);
  CHECK(m1 == ci);
  CHECK(k1 == 1.0);
  // Tangent pair: the midpoint candidate set collapses to a point.
  auto [mh, kh] = intersection_ellipsoid(eye, 1.0, ci, cj, 0.5);
  CHECK(mh == vec2(1.0, 0.0));
  CHECK(kh == 0.0);

  CHECK_THROWS_AS(intersection_ellipsoid(eye, 1.0, ci, cj, 1.5), LambdaOutOfRange);
  CHECK_THROWS_AS(intersection_ellipsoid(eye, 1.0, ci, ci, 0.5), CoincidentCenters);
}

TEST_CASE("projection hand cases") {
  const Ellipsoid sphere(Eigen::VectorXd::Zero(3), SpdMatrix::identity(3), 1.0);
  const PlanarEllipse disk = project_to_plane(sphere, {0, 1});
  CHECK((disk.shape - Eigen::Matrix2d::Identity()).norm() < 1e-12);
  CHECK(disk.level == 1.0);

  Eigen::MatrixXd diag = Eigen::MatrixXd::Zero(3, 3);
  diag.diagonal() << 1.0, 4.0, 9.0;
  const Ellipsoid e(Eigen::VectorXd::Zero(3), SpdMatrix(diag), 1.0);
  const PlanarEllipse shadow = project_to_plane(e, {0, 1});
  Eigen::Matrix2d expected;
  expected << 1.0, 0.0, 0.0, 4.0;
  CHECK((shadow.shape - expected).norm() < 1e-12);

  CHECK_THROWS_AS(project_to_plane(e, {0, 0}), BadIndices);
  CHECK_THROWS_AS(project_to_plane(e, {0, 5}), BadIndices);
}

TEST_CASE("projection is a tight outer shadow (sampling oracle)") {
  Rng rng(33);
  const int n = 4;
  const SpdMatrix p = random_spd(n, rng);
  Eigen::VectorXd center(n);
  for (int i = 0; i < n; ++i) center[i] = rng.uniform(-1.0, 1.0);
  const double c = 0.7;
  const Ellipsoid e(center, p, c);
  const PlanarEllipse shadow = project_to_plane(e, {0, 1});

  double max_level = 0.0;
  for (const Eigen::VectorXd& x : sample_boundary(e, 44, 10000)) {
    const Eigen::Vector2d u(x[0] - shadow.center.x(), x[1] - shadow.center.y());
    const double level = u.dot(shadow.shape * u);
    CHECK(level <= c * (1.0 + 1e-9));
    max_level = std::max(max_level, level);
  }
  CHECK(max_level >= 0.999 * c);
}

TEST_CASE("assumption-1 check hand cases") {
  // Sphere of radius 0.05 about the origin, projected: semi-major 0.05.
  Eigen::MatrixXd p2 = Eigen::MatrixXd::Identity(2, 2) / (0.05 * 0.05);
  const Ellipsoid e(Eigen::VectorXd::Zero(2), SpdMatrix(p2), 1.0);
  CHECK(check_assumption1(e, {0.0, 0.0}, 0.1));
  CHECK_FALSE(check_assumption1(e, {0.06, 0.0}, 0.1));
}

TEST_CASE("assumption-1 true implies all samples project into the ball") {
  Rng rng(55);
  for (int trial = 0; trial < 20; ++trial) {
    const SpdMatrix p = random_spd(4, rng);
    Eigen::VectorXd center(4);
    for (int i = 0; i < 4; ++i) center[i] = rng.uniform(-0.2, 0.2);
    const double c = rng.uniform(0.001, 0.01);
    const Ellipsoid e(center, p, c);
    const Eigen::Vector2d agent(center[0] + rng.uniform(-0.01, 0.01),
                                center[1] + rng.uniform(-0.01, 0.01));
    const double radius = 0.35;
    if (!check_assumption1(e, agent, radius)) continue;
    for (const Eigen::VectorXd& x : sample_boundary(e, 1000 + trial, 1000)) {
      CHECK((Eigen::Vector2d(x[0], x[1]) - agent).norm() <= radius * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("boundary samples sit on the level set and average near the center") {
  Rng rng(66);
  const SpdMatrix p = random_spd(3, rng);
  Eigen::VectorXd center(3);
  center << 0.3, -0.2, 0.5;
  const double c = 1.3;
  const Ellipsoid e(center, p, c);

  const int count = 4000;
  const auto samples = sample_boundary(e, 77, count);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(3);
  for (const auto& x : samples) {
    CHECK(std::abs(p_norm_sq(p, x, center) - c) <= 1e-9);
    CHECK(contains(e, x));
    mean += x;
  }
  mean /= static_cast<double>(count);
  const double semi_major = std::sqrt(c / p.lambda_min());
  CHECK((mean - center).norm() <= 5.0 / std::sqrt(static_cast<double>(count)) * semi_major);
}
