#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <string>

#include "netbridge/errors.hpp"
#include "netbridge/spd.hpp"

namespace netbridge {

/// Solution record for A^T P + P A = -Q.
struct LyapunovCertificate {
  Eigen::MatrixXd a;
  SpdMatrix q;
  SpdMatrix p;
  double residual;  // Frobenius norm of A^T P + P A + Q
};

inline bool is_hurwitz(const Eigen::MatrixXd& a, double margin = 1e-9) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, /*computeEigenvectors=*/false);
  return es.eigenvalues().real().maxCoeff() < -margin;
}

/// Solves the continuous Lyapunov equation A^T P + P A = -Q by vectorization:
/// (I (x) A^T + A^T (x) I) vec(P) = -vec(Q). Dense solve, intended for n <= 16.
inline LyapunovCertificate solve_lyapunov(const Eigen::MatrixXd& a, const SpdMatrix& q) {
  const int n = static_cast<int>(a.rows());
  if (a.cols() != n || q.dim() != n) {
    throw DimensionMismatch("solve_lyapunov: A is " + std::to_string(a.rows()) + "x" +
                            std::to_string(a.cols()) + ", Q dim " + std::to_string(q.dim()));
  }
  if (!is_hurwitz(a)) {
    throw NotHurwitz("solve_lyapunov: A has an eigenvalue with real part >= -1e-9");
  }

  // vec is column-major: vec(A^T P) = (I (x) A^T) vec(P), vec(P A) = (A^T (x) I) vec(P).
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n * n, n * n);
  const Eigen::MatrixXd at = a.transpose();
  for (int j = 0; j < n; ++j) {
    m.block(j * n, j * n, n, n) += at;            // I (x) A^T
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < n; ++k) {
        m(j * n + i, k * n + i) += at(j, k);      // A^T (x) I
      }
    }
  }

  Eigen::Map<const Eigen::VectorXd> q_vec(q.entries().data(), n * n);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  if (lu.rcond() < 1e-12) {
    throw IllConditioned("solve_lyapunov: condition estimate exceeds 1e12");
  }
  const Eigen::VectorXd p_vec = lu.solve(-q_vec);

  Eigen::MatrixXd p_raw = Eigen::Map<const Eigen::MatrixXd>(p_vec.data(), n, n);
  p_raw = 0.5 * (p_raw + p_raw.transpose().eval());
  SpdMatrix p(p_raw);

  const double residual = (at * p.entries() + p.entries() * a + q.entries()).norm();
  const double bound = 1e-8 * (1.0 + q.entries().norm());
  if (residual > bound) {
    throw IllConditioned("solve_lyapunov: residual " + std::to_string(residual) +
                         " exceeds bound " + std::to_string(bound));
  }
  return LyapunovCertificate{a, q, std::move(p), residual};
}

}  // namespace netbridge
