#include <catch2/catch_amalgamated.hpp>

#include "netbridge/dynamics.hpp"
#include "netbridge/lyapunov.hpp"
#include "netbridge/rng.hpp"

using namespace netbridge;

namespace {

// Independent route: assemble the n^2 x n^2 linear system entry by entry from
// the elementwise equation sum_k A_ki P_kj + sum_k P_ik A_kj = -Q_ij
// (row-major unknown ordering) and solve it. Used only to cross-check the
// library solver.
Eigen::MatrixXd lyapunov_vec_oracle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q) {
  const int n = static_cast<int>(a.rows());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n * n, n * n);
  Eigen::VectorXd rhs(n * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const int row = i * n + j;
      rhs[row] = -q(i, j);
      for (int k = 0; k < n; ++k) {
        m(row, k * n + j) += a(k, i);
        m(row, i * n + k) += a(k, j);
      }
    }
  }
  const Eigen::VectorXd x = m.fullPivLu().solve(rhs);
  Eigen::MatrixXd p(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) p(i, j) = x[i * n + j];
  }
  return p;
}

Eigen::MatrixXd random_hurwitz(int n, Rng& rng) {
  Eigen::MatrixXd r(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) r(i, j) = rng.normal();
  }
  return r - (r.norm() + 0.5) * Eigen::MatrixXd::Identity(n, n);
}

}  // namespace

TEST_CASE("identity case solves exactly") {
  const Eigen::MatrixXd a = -Eigen::MatrixXd::Identity(2, 2);
  const SpdMatrix q(2.0 * Eigen::MatrixXd::Identity(2, 2));
  const LyapunovCertificate cert = solve_lyapunov(a, q);
  CHECK((cert.p.entries() - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-12);
  CHECK(cert.residual <= 1e-10);
}

TEST_CASE("2x2 solve matches the vectorization oracle and the hand solution") {
  Eigen::MatrixXd a(2, 2);
  a << 0.0, 1.0, -2.0, -3.0;
  const SpdMatrix q = SpdMatrix::identity(2);
  const LyapunovCertificate cert = solve_lyapunov(a, q);

  // Hand-solved from the elementwise equations: P = [[1.25, 0.25], [0.25, 0.25]].
  Eigen::MatrixXd expected(2, 2);
  expected << 1.25, 0.25, 0.25, 0.25;
  CHECK((cert.p.entries() - expected).norm() < 1e-12);

  const Eigen::MatrixXd oracle = lyapunov_vec_oracle(a, q.entries());
  CHECK((cert.p.entries() - oracle).norm() < 1e-10);
  CHECK(cert.residual <= 1e-10);
}

TEST_CASE("double integrator is rejected as not Hurwitz") {
  Eigen::MatrixXd a(2, 2);
  a << 0.0, 1.0, 0.0, 0.0;
  CHECK_THROWS_AS(solve_lyapunov(a, SpdMatrix::identity(2)), NotHurwitz);
}

TEST_CASE("dimension mismatch is rejected") {
  const Eigen::MatrixXd a = -Eigen::MatrixXd::Identity(3, 3);
  CHECK_THROWS_AS(solve_lyapunov(a, SpdMatrix::identity(2)), DimensionMismatch);
}

TEST_CASE("residual bound holds for random Hurwitz systems") {
  Rng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 5;
    const Eigen::MatrixXd a = random_hurwitz(n, rng);
    const SpdMatrix q = SpdMatrix::identity(n);
    const LyapunovCertificate cert = solve_lyapunov(a, q);
    CHECK(cert.residual <= 1e-8 * (1.0 + q.entries().norm()));
    CHECK((cert.p.entries() - lyapunov_vec_oracle(a, q.entries())).norm() < 1e-8);
  }
}

TEST_CASE("default models produce valid certificates with Q = I") {
  for (const LtiModel& model : default_models()) {
    CHECK(is_hurwitz(model.a()));
    const SpdMatrix q = SpdMatrix::identity(model.dim());
    const LyapunovCertificate cert = solve_lyapunov(model.a(), q);
    CHECK(cert.residual <= 1e-8 * (1.0 + q.entries().norm()));
  }
}
