#pragma once

#include <Eigen/Dense>
#include <cassert>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "netbridge/comm_graph.hpp"
#include "netbridge/dynamics.hpp"
#include "netbridge/ellipsoid.hpp"
#include "netbridge/errors.hpp"
#include "netbridge/lyapunov.hpp"
#include "netbridge/spd.hpp"

namespace netbridge {

/// Shared geometry of the safety filter: Lyapunov matrix P and the two
/// levels 0 < s < c. E_c(x_sp) is the invariant ellipsoid an agent is
/// confined to; E_s(x_sp) is the inner "reached" set that gates setpoint
/// updates.
struct SafetyParams {
  SpdMatrix p;
  double c;
  double s;

  SafetyParams(SpdMatrix p_, double c_, double s_) : p(std::move(p_)), c(c_), s(s_) {
    if (!(0.0 < s && s < c)) {
      throw Error("SafetyParams: require 0 < s < c, got s=" + std::to_string(s) +
                  ", c=" + std::to_string(c));
    }
  }

  int dim() const { return p.dim(); }
  double sqrt_c() const { return std::sqrt(c); }
  double sqrt_s() const { return std::sqrt(s); }
  /// Setpoint advance per accepted update, measured in the P-norm.
  double step_len() const { return sqrt_c() - sqrt_s(); }
};

/// Largest level c such that the shadow of E_c onto the planar position
/// coordinates fits inside a ball of ball_radius around the agent wherever
/// the agent sits inside E_c (worst case: offset equal to the shadow's
/// semi-major axis, so 2 * semi_major <= ball_radius).
inline double max_assumption1_level(const SpdMatrix& p, std::array<int, 2> planar_ix,
                                    double ball_radius) {
  const Eigen::MatrixXd sigma = p.inverse();
  Eigen::Matrix2d sigma_ss;
  sigma_ss << sigma(planar_ix[0], planar_ix[0]), sigma(planar_ix[0], planar_ix[1]),
      sigma(planar_ix[1], planar_ix[0]), sigma(planar_ix[1], planar_ix[1]);
  const double lam = sym2_lambda_max(sigma_ss);
  return ball_radius * ball_radius / (4.0 * lam);
}

/// Builds SafetyParams for a model: P from the Lyapunov solve with Q = q_scale*I,
/// c auto-sized against the communication ball (level_margin below the
/// Assumption-1 maximum), s = s_over_c * c. Passing an explicit level
/// overrides the auto sizing but is still validated against the ball.
inline SafetyParams make_safety_params(const LtiModel& model, double ball_radius,
                                       double q_scale = 1.0, double level_margin = 0.95,
                                       double s_over_c = 0.5, double explicit_c = 0.0) {
  const int n = model.dim();
  const SpdMatrix q(q_scale * Eigen::MatrixXd::Identity(n, n));
  LyapunovCertificate cert = solve_lyapunov(model.a(), q);
  const double c_max = max_assumption1_level(cert.p, model.planar_indices(), ball_radius);
  const double c = explicit_c > 0.0 ? explicit_c : level_margin * c_max;
  if (c > c_max * (1.0 + 1e-12)) {
    throw Error("make_safety_params: level c=" + std::to_string(c) +
                " violates the communication-ball containment bound " + std::to_string(c_max));
  }
  return SafetyParams(std::move(cert.p), c, s_over_c * c);
}

/// Per-agent tracking bookkeeping: current setpoint, the policy's target
/// point, and how many consecutive updates were refused.
struct SetpointTracker {
  int agent_id = 0;
  Eigen::VectorXd x_sp;
  Eigen::VectorXd target_point;
  long blocked_streak = 0;
};

enum class UpdateReason { NotReached, Clear, Blocked };

inline const char* to_string(UpdateReason r) {
  switch (r) {
    case UpdateReason::NotReached: return "not-reached";
    case UpdateReason::Clear: return "clear";
    case UpdateReason::Blocked: return "blocked";
  }
  return "?";
}

struct SafetyDecision {
  int agent_id = 0;
  bool updated = false;
  Eigen::VectorXd candidate;
  std::vector<int> blockers;  // nonempty only when reason == Blocked
  UpdateReason reason = UpdateReason::NotReached;
};

/// Next setpoint along the line from x_sp to the target point: advance by
/// step_len in the P-norm (direction normalized so ||v||_P = 1), or jump to
/// the target itself once it is within one step.
inline Eigen::VectorXd propose_setpoint(const SetpointTracker& tracker, const SafetyParams& params) {
  const Eigen::VectorXd v = tracker.target_point - tracker.x_sp;
  if (v.norm() <= 1e-12) {
    throw DegenerateDirection("propose_setpoint: target coincides with current setpoint");
  }
  const double dist_p = std::sqrt(v.dot(params.p.entries() * v));
  const double step = params.step_len();
  if (dist_p <= step) {
    return tracker.target_point;
  }
  return tracker.x_sp + (step / dist_p) * v;
}

/// One Algorithm-1 attempt for a single agent. The caller supplies exactly
/// the one-hop neighbor set D_i(t) with those agents' current setpoints and
/// guarantees they cannot change during this call (serialized rounds).
inline SafetyDecision try_update_setpoint(SetpointTracker& tracker, const SafetyParams& params,
                                          const Eigen::VectorXd& state_x,
                                          const std::vector<std::pair<int, Eigen::VectorXd>>& neighbor_setpoints) {
  SafetyDecision decision;
  decision.agent_id = tracker.agent_id;

  if (p_norm_sq(params.p, state_x, tracker.x_sp) > params.s) {
    decision.reason = UpdateReason::NotReached;
    decision.candidate = tracker.x_sp;
    return decision;
  }

  // Already at the target: a hold is trivially granted.
  if ((tracker.target_point - tracker.x_sp).norm() <= 1e-12) {
    decision.reason = UpdateReason::Clear;
    decision.updated = true;
    decision.candidate = tracker.x_sp;
    tracker.blocked_streak = 0;
    return decision;
  }

  decision.candidate = propose_setpoint(tracker, params);
  for (const auto& [j, sp_j] : neighbor_setpoints) {
    if (ellipsoids_intersect(params.p, params.c, decision.candidate, sp_j)) {
      decision.blockers.push_back(j);
    }
  }
  if (decision.blockers.empty()) {
    decision.reason = UpdateReason::Clear;
    decision.updated = true;
    // The state that gated this update stays inside E_c of the new setpoint.
    assert(p_norm_sq(params.p, state_x, decision.candidate) <= params.c * (1.0 + 1e-9));
    tracker.x_sp = decision.candidate;
    tracker.blocked_streak = 0;
  } else {
    decision.reason = UpdateReason::Blocked;
    tracker.blocked_streak += 1;
  }
  return decision;
}

enum class UpdateOrder { Fixed, RoundRobin };

/// True iff every pair of setpoints is non-intersecting per the 4c test.
inline bool setpoints_pairwise_safe(const std::vector<SetpointTracker>& trackers,
                                    const SafetyParams& params) {
  for (std::size_t i = 0; i < trackers.size(); ++i) {
    for (std::size_t j = i + 1; j < trackers.size(); ++j) {
      if (ellipsoids_intersect(params.p, params.c, trackers[i].x_sp, trackers[j].x_sp)) {
        return false;
      }
    }
  }
  return true;
}

/// One serialized update round over all agents. Agents are visited in
/// ascending id order (optionally rotated per round); each update takes
/// effect immediately, so later agents check against earlier agents' new
/// setpoints. This is what makes the "neighbors cannot change their
/// setpoints during my update" assumption hold inside the round.
inline std::vector<SafetyDecision> run_update_round(std::vector<SetpointTracker>& trackers,
                                                    const std::vector<AgentState>& states,
                                                    const CommGraph& graph,
                                                    const SafetyParams& params,
                                                    bool check_neighbors = true,
                                                    UpdateOrder order = UpdateOrder::Fixed,
                                                    long round_index = 0) {
  const int n = static_cast<int>(trackers.size());
  if (static_cast<int>(states.size()) != n) {
    throw DimensionMismatch("run_update_round: states vs trackers count");
  }
  for (int i = 0; i < n; ++i) {
    if (trackers[i].agent_id != i) {
      throw Error("run_update_round: trackers must be indexed by agent id");
    }
  }
  if (check_neighbors && !setpoints_pairwise_safe(trackers, params)) {
    throw UnsafeInitialConfiguration("run_update_round: setpoints unsafe before round");
  }

  std::vector<int> visit(n);
  std::iota(visit.begin(), visit.end(), 0);
  if (order == UpdateOrder::RoundRobin && n > 0) {
    const int shift = static_cast<int>(round_index % n);
    std::rotate(visit.begin(), visit.begin() + shift, visit.end());
  }

  std::vector<SafetyDecision> decisions(n);
  for (int idx : visit) {
    SetpointTracker& tracker = trackers[idx];
    std::vector<std::pair<int, Eigen::VectorXd>> neighbors;
    if (check_neighbors) {
      for (int j : graph.one_hop_agents(agent_id(tracker.agent_id))) {
        neighbors.emplace_back(j, trackers[j].x_sp);
      }
    }
    decisions[idx] = try_update_setpoint(tracker, params, states[idx].x, neighbors);
  }

  assert(!check_neighbors || setpoints_pairwise_safe(trackers, params));
  return decisions;
}

/// Diagnostic only: the tracker has been refused at least `threshold`
/// consecutive times. Never alters control flow.
inline bool detect_deadlock(const SetpointTracker& tracker, long threshold) {
  return tracker.blocked_streak >= threshold;
}

}  // namespace netbridge
