#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <string>

#include "netbridge/errors.hpp"

namespace netbridge {

/// Symmetric positive definite matrix, validated on construction.
///
/// Acceptance tolerances: max |P_ij - P_ji| <= 1e-10, and
/// lambda_min > 1e-12 * lambda_max (relative eigenvalue floor).
class SpdMatrix {
 public:
  explicit SpdMatrix(Eigen::MatrixXd entries) : m_(std::move(entries)) {
    if (m_.rows() != m_.cols() || m_.rows() == 0) {
      throw SpdViolation("SpdMatrix: matrix must be square and non-empty");
    }
    const double asym = (m_ - m_.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-10) {
      throw SpdViolation("SpdMatrix: asymmetry " + std::to_string(asym) + " exceeds 1e-10");
    }
    m_ = 0.5 * (m_ + m_.transpose().eval());  // exact symmetry for downstream solvers
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m_, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (!(hi > 0.0) || lo <= 1e-12 * hi) {
      throw SpdViolation("SpdMatrix: not positive definite (lambda_min=" + std::to_string(lo) +
                         ", lambda_max=" + std::to_string(hi) + ")");
    }
    lambda_min_ = lo;
    lambda_max_ = hi;
  }

  static SpdMatrix identity(int n) { return SpdMatrix(Eigen::MatrixXd::Identity(n, n)); }

  const Eigen::MatrixXd& entries() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }
  double lambda_min() const { return lambda_min_; }
  double lambda_max() const { return lambda_max_; }

  /// Lower-triangular Cholesky factor L with P = L L^T.
  Eigen::MatrixXd cholesky_lower() const {
    Eigen::LLT<Eigen::MatrixXd> llt(m_);
    if (llt.info() != Eigen::Success) {
      throw SpdViolation("SpdMatrix: Cholesky factorization failed");
    }
    return llt.matrixL();
  }

  Eigen::MatrixXd inverse() const { return m_.llt().solve(Eigen::MatrixXd::Identity(dim(), dim())); }

 private:
  Eigen::MatrixXd m_;
  double lambda_min_ = 0.0;
  double lambda_max_ = 0.0;
};

/// (x - center)^T P (x - center). The induced squared P-norm of the offset.
inline double p_norm_sq(const SpdMatrix& p, const Eigen::VectorXd& x, const Eigen::VectorXd& center) {
  if (x.size() != p.dim() || center.size() != p.dim()) {
    throw DimensionMismatch("p_norm_sq: vector dims " + std::to_string(x.size()) + "/" +
                            std::to_string(center.size()) + " vs matrix dim " +
                            std::to_string(p.dim()));
  }
  const Eigen::VectorXd d = x - center;
  return d.dot(p.entries() * d);
}

inline double p_norm(const SpdMatrix& p, const Eigen::VectorXd& x, const Eigen::VectorXd& center) {
  return std::sqrt(p_norm_sq(p, x, center));
}

}  // namespace netbridge
