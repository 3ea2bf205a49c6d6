#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <utility>
#include <vector>

#include "netbridge/errors.hpp"
#include "netbridge/rng.hpp"
#include "netbridge/spd.hpp"

namespace netbridge {

/// Sublevel set { x : ||x - center||_P^2 <= level }. Closed, hence the
/// boundary belongs to the set.
struct Ellipsoid {
  Eigen::VectorXd center;
  SpdMatrix shape;
  double level;

  Ellipsoid(Eigen::VectorXd center_, SpdMatrix shape_, double level_)
      : center(std::move(center_)), shape(std::move(shape_)), level(level_) {
    if (center.size() != shape.dim()) {
      throw DimensionMismatch("Ellipsoid: center dim vs shape dim");
    }
    if (!(level > 0.0)) {
      throw SpdViolation("Ellipsoid: level must be positive");
    }
  }
};

inline bool contains(const Ellipsoid& e, const Eigen::VectorXd& x) {
  return p_norm_sq(e.shape, x, e.center) <= e.level;
}

/// Intersection test for two sets sharing the same shape P and level c:
/// they intersect iff ||center_j - center_i||_P^2 <= 4c. Equality (tangency)
/// counts as intersection.
inline bool ellipsoids_intersect(const SpdMatrix& p, double c, const Eigen::VectorXd& center_i,
                                 const Eigen::VectorXd& center_j) {
  return p_norm_sq(p, center_j, center_i) <= 4.0 * c;
}

/// Characterization of the overlap of two same-shape ellipsoids along the
/// segment between their centers: for lambda in [0,1] the candidate set is
/// centered at m_lambda with size parameter K_lambda. K_lambda <= 0 means
/// empty or a single point at that lambda.
inline std::pair<Eigen::VectorXd, double> intersection_ellipsoid(const SpdMatrix& p, double c,
                                                                 const Eigen::VectorXd& center_i,
                                                                 const Eigen::VectorXd& center_j,
                                                                 double lambda) {
  (void)c;  // shared level; retained in the signature for symmetry with the test
  if (lambda < 0.0 || lambda > 1.0) {
    throw LambdaOutOfRange("intersection_ellipsoid: lambda=" + std::to_string(lambda));
  }
  if (center_i.size() != center_j.size() || center_i.size() != p.dim()) {
    throw DimensionMismatch("intersection_ellipsoid: center dims vs shape dim");
  }
  if ((center_i - center_j).norm() == 0.0) {
    throw CoincidentCenters("intersection_ellipsoid: centers coincide");
  }
  const Eigen::VectorXd m = lambda * center_i + (1.0 - lambda) * center_j;
  const double k = 1.0 - lambda * (1.0 - lambda) * p_norm_sq(p, center_j, center_i);
  return {m, k};
}

/// 2-D shadow of an ellipsoid onto a coordinate plane.
struct PlanarEllipse {
  Eigen::Vector2d center;
  Eigen::Matrix2d shape;  // SPD; ellipse is { u : (u-center)^T shape (u-center) <= level }
  double level;
};

/// Exact orthogonal projection (shadow) of e onto coordinates (i, j): with
/// Sigma = P^-1, the shadow's shape matrix is the inverse of the selected 2x2
/// block of Sigma, same level. Every member of e projects inside, and the
/// ellipse boundary is attained.
inline PlanarEllipse project_to_plane(const Ellipsoid& e, std::array<int, 2> coord_indices) {
  const int n = e.shape.dim();
  const auto [i, j] = coord_indices;
  if (i < 0 || j < 0 || i >= n || j >= n || i == j) {
    throw BadIndices("project_to_plane: indices (" + std::to_string(i) + "," + std::to_string(j) +
                     ") invalid for dim " + std::to_string(n));
  }
  const Eigen::MatrixXd sigma = e.shape.inverse();
  Eigen::Matrix2d block;
  block << sigma(i, i), sigma(i, j), sigma(j, i), sigma(j, j);
  const double det = block.determinant();
  if (!(det > 0.0) || !std::isfinite(det)) {
    throw SingularShape("project_to_plane: projected block not invertible");
  }
  Eigen::Matrix2d inv;
  inv << block(1, 1), -block(0, 1), -block(1, 0), block(0, 0);
  inv /= det;
  inv = 0.5 * (inv + inv.transpose().eval());
  return PlanarEllipse{Eigen::Vector2d(e.center[i], e.center[j]), inv, e.level};
}

/// Largest eigenvalue of a symmetric 2x2 matrix.
inline double sym2_lambda_max(const Eigen::Matrix2d& m) {
  const double tr = m.trace();
  const double det = m.determinant();
  const double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
  return 0.5 * (tr + disc);
}

/// Sufficient containment check: the shadow of e lies within the ball of
/// ball_radius around agent_pos if the center offset plus the shadow's
/// semi-major axis fits inside the radius. Conservative by construction.
inline bool check_assumption1(const Ellipsoid& e, const Eigen::Vector2d& agent_pos,
                              double ball_radius, std::array<int, 2> position_indices = {0, 1}) {
  const PlanarEllipse shadow = project_to_plane(e, position_indices);
  // Shadow semi-major axis: sqrt(level * lambda_max(Sigma_SS)), where
  // Sigma_SS = shadow.shape^-1.
  const Eigen::Matrix2d sigma_ss = shadow.shape.inverse();
  const double semi_major = std::sqrt(shadow.level * sym2_lambda_max(sigma_ss));
  const double offset = (agent_pos - shadow.center).norm();
  return offset + semi_major <= ball_radius;
}

/// Points on the boundary { ||x - center||_P^2 = level }, directions uniform
/// on the sphere before shaping through the Cholesky factor.
inline std::vector<Eigen::VectorXd> sample_boundary(const Ellipsoid& e, std::uint64_t seed,
                                                    int count) {
  const int n = e.shape.dim();
  const Eigen::MatrixXd l = e.shape.cholesky_lower();
  const auto lt = l.transpose().triangularView<Eigen::Upper>();
  const double scale = std::sqrt(e.level);
  Rng rng(seed);
  std::vector<Eigen::VectorXd> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    const Eigen::VectorXd u = rng.unit_vector(n);
    // Solve L^T y = u, so that y^T P y = u^T u = 1.
    out.push_back(e.center + scale * lt.solve(u));
  }
  return out;
}

}  // namespace netbridge
