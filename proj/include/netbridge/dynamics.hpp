#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <unsupported/Eigen/MatrixFunctions>
#include <vector>

#include "netbridge/errors.hpp"
#include "netbridge/spd.hpp"

namespace netbridge {

/// Closed-loop LTI agent model xdot = A (x - x_sp), advanced with the exact
/// discrete map x' = x_sp + exp(A dt) (x - x_sp). The exponential is
/// precomputed once per model, so sublevel sets of the Lyapunov function stay
/// exactly invariant under stepping (no integrator drift).
class LtiModel {
 public:
  LtiModel(Eigen::MatrixXd a, double dt, std::string label, std::array<int, 2> planar_ix)
      : a_(std::move(a)), dt_(dt), label_(std::move(label)), planar_ix_(planar_ix) {
    if (a_.rows() != a_.cols() || a_.rows() == 0) {
      throw DimensionMismatch("LtiModel: A must be square");
    }
    if (!(dt_ > 0.0)) {
      throw Error("LtiModel: dt must be positive");
    }
    if (!is_hurwitz(a_)) {
      throw NotHurwitz("LtiModel '" + label_ + "': A is not Hurwitz");
    }
    exp_a_dt_ = (a_ * dt_).exp();
  }

  const Eigen::MatrixXd& a() const { return a_; }
  const Eigen::MatrixXd& exp_a_dt() const { return exp_a_dt_; }
  int dim() const { return static_cast<int>(a_.rows()); }
  double dt() const { return dt_; }
  const std::string& label() const { return label_; }

  /// Indices of the planar position coordinates (p_x, p_y) in the state.
  std::array<int, 2> planar_indices() const { return planar_ix_; }

  Eigen::Vector2d planar_position(const Eigen::VectorXd& x) const {
    return {x[planar_ix_[0]], x[planar_ix_[1]]};
  }

  /// State at rest at the given planar position (all other coordinates zero).
  Eigen::VectorXd embed_planar(const Eigen::Vector2d& pos) const {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(dim());
    x[planar_ix_[0]] = pos.x();
    x[planar_ix_[1]] = pos.y();
    return x;
  }

 private:
  Eigen::MatrixXd a_;
  double dt_;
  std::string label_;
  std::array<int, 2> planar_ix_;
  Eigen::MatrixXd exp_a_dt_;
};

struct AgentState {
  Eigen::VectorXd x;
  double time = 0.0;
};

inline AgentState step(const LtiModel& model, const AgentState& state, const Eigen::VectorXd& x_sp) {
  if (state.x.size() != model.dim() || x_sp.size() != model.dim()) {
    throw DimensionMismatch("step: state/setpoint dim vs model dim");
  }
  return AgentState{x_sp + model.exp_a_dt() * (state.x - x_sp), state.time + model.dt()};
}

/// The agent has reached x_sp once its state entered the inner set E_s.
inline bool reached_setpoint(const AgentState& state, const Eigen::VectorXd& x_sp,
                             const SpdMatrix& p, double s) {
  return p_norm_sq(p, state.x, x_sp) <= s;
}

namespace detail {

inline Eigen::Matrix2d pd_axis_block(double k_p, double k_d) {
  Eigen::Matrix2d b;
  b << 0.0, 1.0, -k_p, -k_d;
  return b;
}

}  // namespace detail

inline constexpr double kDefaultDt = 0.02;

/// Planar double integrator per axis, closed by state feedback k_p=4, k_d=4
/// (critically damped, poles at -2). State (p_x, v_x, p_y, v_y).
inline LtiModel make_planar2d_model(double dt = kDefaultDt) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4, 4);
  a.block<2, 2>(0, 0) = detail::pd_axis_block(4.0, 4.0);
  a.block<2, 2>(2, 2) = detail::pd_axis_block(4.0, 4.0);
  return LtiModel(std::move(a), dt, "planar-2d", {0, 2});
}

/// 12-state surrogate for a position-controlled vehicle: three translational
/// axes with the same outer-loop gains as planar-2d, plus three faster
/// attitude axes (k_p=16, k_d=8, poles at -4). State layout
/// (p_x, v_x, p_y, v_y, p_z, v_z, roll, roll_rate, pitch, pitch_rate, yaw, yaw_rate).
inline LtiModel make_quad12_model(double dt = kDefaultDt) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(12, 12);
  for (int axis = 0; axis < 3; ++axis) {
    a.block<2, 2>(2 * axis, 2 * axis) = detail::pd_axis_block(4.0, 4.0);
  }
  for (int axis = 3; axis < 6; ++axis) {
    a.block<2, 2>(2 * axis, 2 * axis) = detail::pd_axis_block(16.0, 8.0);
  }
  return LtiModel(std::move(a), dt, "quad-12", {0, 2});
}

inline std::vector<LtiModel> default_models(double dt = kDefaultDt) {
  std::vector<LtiModel> models;
  models.push_back(make_planar2d_model(dt));
  models.push_back(make_quad12_model(dt));
  return models;
}

inline LtiModel make_model_by_label(const std::string& label, double dt = kDefaultDt) {
  if (label == "planar-2d") return make_planar2d_model(dt);
  if (label == "quad-12") return make_quad12_model(dt);
  throw ConfigError("unknown model label '" + label + "' (expected planar-2d or quad-12)");
}

}  // namespace netbridge
