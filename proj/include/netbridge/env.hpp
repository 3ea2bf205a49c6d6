#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "netbridge/comm_graph.hpp"
#include "netbridge/dynamics.hpp"
#include "netbridge/errors.hpp"
#include "netbridge/rng.hpp"
#include "netbridge/safety_filter.hpp"

namespace netbridge {

enum class Variant { Baseline, A, ANode, B, C };

inline const char* to_string(Variant v) {
  switch (v) {
    case Variant::Baseline: return "baseline";
    case Variant::A: return "a";
    case Variant::ANode: return "a-node";
    case Variant::B: return "b";
    case Variant::C: return "c";
  }
  return "?";
}

inline Variant variant_from_string(const std::string& s) {
  if (s == "baseline") return Variant::Baseline;
  if (s == "a") return Variant::A;
  if (s == "a-node") return Variant::ANode;
  if (s == "b") return Variant::B;
  if (s == "c") return Variant::C;
  throw ConfigError("unknown variant '" + s + "' (expected baseline|a|a-node|b|c)");
}

/// Per-axis move: backward (-1), hold (0), or forward (+1). Flattened as
/// index = 3*(a_x+1) + (a_y+1), giving 9 joint actions.
struct ActionPair {
  int ax = 0;
  int ay = 0;

  static constexpr int kCount = 9;

  static ActionPair from_index(int idx) {
    if (idx < 0 || idx >= kCount) {
      throw Error("ActionPair: index " + std::to_string(idx) + " out of range");
    }
    return ActionPair{idx / 3 - 1, idx % 3 - 1};
  }

  int index() const { return 3 * (ax + 1) + (ay + 1); }

  friend bool operator==(const ActionPair&, const ActionPair&) = default;
};

struct EnvConfig {
  int n_agents = 3;
  double comm_range = 0.20;
  int episode_len = 100;
  double action_offset = 0.05;
  int target_pause = 5;
  double target_speed = 0.02;
  Variant variant = Variant::A;
  double penalty_value = -10.0;  // applied per blocked agent in variants B and C
  double centroid_penalty_scale = 1.0;
  std::string model = "planar-2d";
  double physics_dt = kDefaultDt;
  int physics_substeps = 10;
  std::uint64_t seed = 1;

  // Safety geometry. level_c = 0 auto-sizes from the communication-ball bound.
  double q_scale = 1.0;
  double level_margin = 0.95;
  double s_over_c = 0.5;
  double level_c = 0.0;
  long deadlock_threshold = 10;
  UpdateOrder update_order = UpdateOrder::Fixed;

  /// Evaluation forces the filter on regardless of variant; training leaves
  /// this unset and derives it from the variant (Baseline trains unfiltered).
  std::optional<bool> filter_override;

  // Scenario support: pinned layouts and frozen targets for scripted runs.
  std::vector<Eigen::Vector2d> fixed_agent_positions;
  std::vector<Eigen::Vector2d> fixed_target_positions;
  bool freeze_targets = false;

  bool filter_enabled() const {
    return filter_override.value_or(variant != Variant::Baseline);
  }
};

inline int node_feature_dim(Variant v) { return v == Variant::ANode ? 10 : 9; }

inline int edge_feature_dim(Variant v) {
  switch (v) {
    case Variant::Baseline: return 3;
    case Variant::ANode: return 0;  // node-level features only
    default: return 4;              // base edge features + S_ij
  }
}

struct NeighborView {
  int id = 0;
  Eigen::VectorXd node;
  Eigen::VectorXd edge;
};

/// Local one-hop view: ego node features plus one entry per neighboring
/// agent. Node features: [scaled id, p_x, p_y, last a_x, last a_y, tA, tB];
/// A-Node appends the agent's own activation bit. Edge features (from ego's
/// perspective): [dp_x, dp_y, d_ij] plus the pairwise activation bit S_ij in
/// variants A/B/C.
struct Observation {
  Eigen::VectorXd ego;
  std::vector<NeighborView> neighbors;
};

struct RewardBreakdown {
  double base = 0.0;
  double centroid_penalty = 0.0;
  double path_bonus = 0.0;
  double total = 0.0;
};

/// Connectivity reward: largest-component fraction minus the centroid
/// distance penalty, overridden by the flat path bonus whenever the two
/// targets are connected.
inline RewardBreakdown compute_reward(const CommGraph& graph,
                                      const std::vector<Eigen::Vector2d>& agent_positions,
                                      const std::vector<Eigen::Vector2d>& target_positions,
                                      double centroid_penalty_scale = 1.0) {
  if (agent_positions.empty() || target_positions.size() != 2) {
    throw Error("compute_reward: need >=1 agent and exactly 2 targets");
  }
  RewardBreakdown r;
  r.base = static_cast<double>(graph.largest_component_size()) / graph.node_count();
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  for (const auto& p : agent_positions) centroid += p;
  centroid /= static_cast<double>(agent_positions.size());
  const Eigen::Vector2d midpoint = 0.5 * (target_positions[0] + target_positions[1]);
  r.centroid_penalty = centroid_penalty_scale * (centroid - midpoint).norm();
  if (graph.path_exists(target_id(0), target_id(1))) {
    r.path_bonus = 100.0;
    r.total = r.path_bonus;
  } else {
    r.total = r.base - r.centroid_penalty;
  }
  return r;
}

struct StepInfo {
  std::vector<std::uint8_t> agent_blocked;        // per agent, deduplicated per step
  std::vector<std::pair<int, int>> blocked_pairs; // i < j, deduplicated per step
  int activation_count = 0;                       // number of blocked agents this step
  std::vector<std::uint8_t> agent_deadlocked;     // diagnostic, per deadlock_threshold
  bool waypoint_fallback = false;
};

struct StepResult {
  std::vector<Observation> obs;
  double reward = 0.0;  // shared by all agents (joint reward)
  RewardBreakdown breakdown;
  bool done = false;
  bool safety_truncated = false;
  StepInfo info;
};

/// The dynamic network bridging environment: n agents with LTI tracking
/// dynamics and the setpoint safety filter, two waypoint-driven targets, a
/// per-step communication graph, and the shared connectivity reward.
class Env {
 public:
  using RoundObserver =
      std::function<void(const CommGraph&, const std::vector<SetpointTracker>&,
                         const std::vector<AgentState>&, const std::vector<SafetyDecision>&)>;

  explicit Env(EnvConfig config)
      : cfg_(std::move(config)),
        model_(make_model_by_label(cfg_.model, cfg_.physics_dt)),
        safety_(make_safety_params(model_, cfg_.comm_range / 2.0, cfg_.q_scale,
                                   cfg_.level_margin, cfg_.s_over_c, cfg_.level_c)),
        rng_(cfg_.seed) {
    if (cfg_.n_agents < 2) throw ConfigError("EnvConfig: n_agents must be >= 2");
    if (cfg_.episode_len <= 0) throw ConfigError("EnvConfig: episode_len must be positive");
    if (cfg_.action_offset <= 0.0) throw ConfigError("EnvConfig: action_offset must be positive");
    if (cfg_.physics_substeps <= 0) throw ConfigError("EnvConfig: physics_substeps must be positive");
  }

  const EnvConfig& config() const { return cfg_; }
  const LtiModel& model() const { return model_; }
  const SafetyParams& safety() const { return safety_; }
  const CommGraph& graph() const { return *graph_; }
  const std::vector<AgentState>& agent_states() const { return states_; }
  const std::vector<SetpointTracker>& trackers() const { return trackers_; }
  const std::vector<Eigen::Vector2d>& target_positions() const { return target_pos_; }
  int time_step() const { return t_; }
  bool filter_enabled() const { return cfg_.filter_enabled(); }
  long episode_activations() const { return episode_activations_; }

  void set_round_observer(RoundObserver obs) { round_observer_ = std::move(obs); }

  Eigen::Vector2d agent_position(int i) const { return model_.planar_position(states_[i].x); }

  std::vector<Observation> reset(std::uint64_t seed) {
    rng_ = Rng(seed);
    t_ = 0;
    episode_activations_ = 0;
    round_counter_ = 0;
    last_blocked_.assign(cfg_.n_agents, 0);
    last_pairs_.clear();
    last_actions_.assign(cfg_.n_agents, ActionPair{});

    place_agents();
    place_targets();
    rebuild_graph();
    return observations();
  }

  StepResult step(const std::vector<ActionPair>& actions) {
    if (static_cast<int>(actions.size()) != cfg_.n_agents) {
      throw ActionCountMismatch("Env::step: got " + std::to_string(actions.size()) +
                                " actions for " + std::to_string(cfg_.n_agents) + " agents");
    }

    // Decentralized decisions: each action picks the next target point
    // relative to the agent's current position.
    for (int i = 0; i < cfg_.n_agents; ++i) {
      const Eigen::Vector2d w =
          agent_position(i) +
          cfg_.action_offset * Eigen::Vector2d(actions[i].ax, actions[i].ay);
      trackers_[i].target_point = model_.embed_planar(w);
      last_actions_[i] = actions[i];
    }

    // Tracking layer: one safety-checked update round before every physics
    // substep, so the setpoint sequence toward the target point plays out
    // within the decision step. The graph is refreshed per round; the
    // Assumption-1 ball bound leaves no slack for stale adjacency.
    StepResult result;
    result.info.agent_blocked.assign(cfg_.n_agents, 0);
    const bool filter_on = cfg_.filter_enabled();
    for (int sub = 0; sub < cfg_.physics_substeps; ++sub) {
      rebuild_graph();
      const auto decisions = run_update_round(trackers_, states_, *graph_, safety_, filter_on,
                                              cfg_.update_order, round_counter_++);
      if (round_observer_) round_observer_(*graph_, trackers_, states_, decisions);
      for (const auto& d : decisions) {
        if (d.reason == UpdateReason::Blocked) {
          result.info.agent_blocked[d.agent_id] = 1;
          for (int j : d.blockers) {
            auto pair = std::minmax(d.agent_id, j);
            result.info.blocked_pairs.emplace_back(pair.first, pair.second);
          }
        }
      }
      for (int i = 0; i < cfg_.n_agents; ++i) {
        states_[i] = netbridge::step(model_, states_[i], trackers_[i].x_sp);
      }
    }
    std::sort(result.info.blocked_pairs.begin(), result.info.blocked_pairs.end());
    result.info.blocked_pairs.erase(
        std::unique(result.info.blocked_pairs.begin(), result.info.blocked_pairs.end()),
        result.info.blocked_pairs.end());
    result.info.activation_count = static_cast<int>(
        std::count(result.info.agent_blocked.begin(), result.info.agent_blocked.end(), 1));
    episode_activations_ += result.info.activation_count;

    result.info.agent_deadlocked.assign(cfg_.n_agents, 0);
    for (int i = 0; i < cfg_.n_agents; ++i) {
      if (detect_deadlock(trackers_[i], cfg_.deadlock_threshold)) {
        result.info.agent_deadlocked[i] = 1;
      }
    }

    if (!cfg_.freeze_targets) result.info.waypoint_fallback = advance_targets();
    rebuild_graph();

    std::vector<Eigen::Vector2d> agent_pos;
    for (int i = 0; i < cfg_.n_agents; ++i) agent_pos.push_back(agent_position(i));
    result.breakdown = compute_reward(*graph_, agent_pos, target_pos_, cfg_.centroid_penalty_scale);
    result.reward = result.breakdown.total;
    if (filter_on && (cfg_.variant == Variant::B || cfg_.variant == Variant::C)) {
      result.reward += cfg_.penalty_value * result.info.activation_count;
    }

    t_ += 1;
    result.safety_truncated = cfg_.variant == Variant::C && filter_on &&
                              result.info.activation_count > 0;
    result.done = result.safety_truncated || t_ >= cfg_.episode_len;

    last_blocked_ = result.info.agent_blocked;
    last_pairs_ = result.info.blocked_pairs;
    result.obs = observations();
    return result;
  }

  Observation observe(int agent) const {
    if (agent < 0 || agent >= cfg_.n_agents) {
      throw UnknownEntity("Env::observe: agent " + std::to_string(agent));
    }
    Observation obs;
    obs.ego = node_features(agent);
    for (int j : graph_->one_hop_agents(agent_id(agent))) {
      NeighborView nv;
      nv.id = j;
      nv.node = node_features(j);
      nv.edge = edge_features(agent, j);
      obs.neighbors.push_back(std::move(nv));
    }
    return obs;
  }

 private:
  std::vector<Observation> observations() const {
    std::vector<Observation> out;
    out.reserve(cfg_.n_agents);
    for (int i = 0; i < cfg_.n_agents; ++i) out.push_back(observe(i));
    return out;
  }

  Eigen::VectorXd node_features(int i) const {
    Eigen::VectorXd f(node_feature_dim(cfg_.variant));
    const Eigen::Vector2d p = agent_position(i);
    const double id_scale = cfg_.n_agents > 1 ? 1.0 / (cfg_.n_agents - 1) : 1.0;
    f[0] = i * id_scale;
    f[1] = p.x();
    f[2] = p.y();
    f[3] = last_actions_[i].ax;
    f[4] = last_actions_[i].ay;
    f[5] = target_pos_[0].x();
    f[6] = target_pos_[0].y();
    f[7] = target_pos_[1].x();
    f[8] = target_pos_[1].y();
    if (cfg_.variant == Variant::ANode) f[9] = last_blocked_[i] ? 1.0 : 0.0;
    return f;
  }

  Eigen::VectorXd edge_features(int i, int j) const {
    Eigen::VectorXd f(edge_feature_dim(cfg_.variant));
    if (f.size() == 0) return f;
    const Eigen::Vector2d pi = agent_position(i);
    const Eigen::Vector2d pj = agent_position(j);
    f[0] = pi.x() - pj.x();
    f[1] = pi.y() - pj.y();
    f[2] = (pi - pj).norm();
    if (f.size() > 3) {
      const auto pair = std::minmax(i, j);
      const bool blocked =
          std::find(last_pairs_.begin(), last_pairs_.end(),
                    std::make_pair(pair.first, pair.second)) != last_pairs_.end();
      f[3] = blocked ? 1.0 : 0.0;
    }
    return f;
  }

  void place_agents() {
    states_.clear();
    trackers_.clear();
    std::vector<Eigen::Vector2d> placed;
    if (!cfg_.fixed_agent_positions.empty()) {
      if (static_cast<int>(cfg_.fixed_agent_positions.size()) != cfg_.n_agents) {
        throw ConfigError("fixed_agent_positions count vs n_agents");
      }
      placed = cfg_.fixed_agent_positions;
    } else {
      int attempts = 0;
      while (static_cast<int>(placed.size()) < cfg_.n_agents) {
        if (++attempts > kPlacementAttempts) {
          throw PlacementFailure("Env::reset: could not place agents with safe setpoints");
        }
        const Eigen::Vector2d pos(rng_.uniform(), rng_.uniform());
        const Eigen::VectorXd sp = model_.embed_planar(pos);
        const bool clear = std::all_of(placed.begin(), placed.end(), [&](const Eigen::Vector2d& q) {
          return !ellipsoids_intersect(safety_.p, safety_.c, sp, model_.embed_planar(q));
        });
        if (clear) placed.push_back(pos);
      }
    }
    for (int i = 0; i < cfg_.n_agents; ++i) {
      states_.push_back(AgentState{model_.embed_planar(placed[i]), 0.0});
      SetpointTracker tr;
      tr.agent_id = i;
      tr.x_sp = states_[i].x;
      tr.target_point = tr.x_sp;
      trackers_.push_back(std::move(tr));
    }
    // Pinned layouts must satisfy the initial-safety assumption too.
    if (cfg_.filter_enabled() && !setpoints_pairwise_safe(trackers_, safety_)) {
      throw UnsafeInitialConfiguration("Env::reset: initial setpoints intersect pairwise");
    }
  }

  void place_targets() {
    target_pos_.clear();
    target_waypoint_.clear();
    target_pause_.clear();
    if (!cfg_.fixed_target_positions.empty()) {
      if (cfg_.fixed_target_positions.size() != 2) {
        throw ConfigError("fixed_target_positions must hold exactly 2 entries");
      }
      target_pos_ = cfg_.fixed_target_positions;
    } else {
      target_pos_.emplace_back(rng_.uniform(), rng_.uniform());
      int attempts = 0;
      for (;;) {
        if (++attempts > kPlacementAttempts) {
          throw PlacementFailure("Env::reset: could not place targets apart");
        }
        const Eigen::Vector2d p(rng_.uniform(), rng_.uniform());
        if ((p - target_pos_[0]).norm() > 2.0 * cfg_.comm_range) {
          target_pos_.push_back(p);
          break;
        }
      }
    }
    target_pause_.assign(2, 0);
    if (cfg_.freeze_targets) {
      target_waypoint_ = target_pos_;
    } else {
      target_waypoint_.resize(2);
      target_waypoint_[0] = sample_waypoint(std::nullopt).first;
      target_waypoint_[1] = sample_waypoint(target_waypoint_[0]).first;
    }
  }

  /// New waypoint: uniform in the unit square, outside every agent's
  /// communication range, and (given the other target's waypoint) separated
  /// by 2..4 communication ranges so a single agent cannot bridge alone.
  /// Falls back to the corner farthest from the agents if sampling fails.
  std::pair<Eigen::Vector2d, bool> sample_waypoint(std::optional<Eigen::Vector2d> other) {
    for (int attempt = 0; attempt < kPlacementAttempts; ++attempt) {
      const Eigen::Vector2d w(rng_.uniform(), rng_.uniform());
      if (min_agent_distance(w) <= cfg_.comm_range) continue;
      if (other) {
        const double d = (w - *other).norm();
        if (d < 2.0 * cfg_.comm_range || d > 4.0 * cfg_.comm_range) continue;
      }
      return {w, false};
    }
    const Eigen::Vector2d corners[4] = {{0.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}, {1.0, 1.0}};
    const Eigen::Vector2d* best = &corners[0];
    for (const auto& c : corners) {
      if (min_agent_distance(c) > min_agent_distance(*best)) best = &c;
    }
    return {*best, true};
  }

  double min_agent_distance(const Eigen::Vector2d& p) const {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < cfg_.n_agents; ++i) {
      best = std::min(best, (agent_position(i) - p).norm());
    }
    return best;
  }

  bool advance_targets() {
    bool fallback = false;
    for (int k = 0; k < 2; ++k) {
      if (target_pause_[k] > 0) {
        --target_pause_[k];
        if (target_pause_[k] == 0) {
          auto [w, used_fallback] = sample_waypoint(target_waypoint_[1 - k]);
          target_waypoint_[k] = w;
          fallback |= used_fallback;
        }
        continue;
      }
      const Eigen::Vector2d delta = target_waypoint_[k] - target_pos_[k];
      const double dist = delta.norm();
      if (dist <= cfg_.target_speed) {
        target_pos_[k] = target_waypoint_[k];
        target_pause_[k] = cfg_.target_pause;
      } else {
        target_pos_[k] += (cfg_.target_speed / dist) * delta;
      }
    }
    return fallback;
  }

  void rebuild_graph() {
    std::vector<std::pair<EntityId, Eigen::Vector2d>> positions;
    for (int i = 0; i < cfg_.n_agents; ++i) positions.emplace_back(agent_id(i), agent_position(i));
    for (int k = 0; k < 2; ++k) positions.emplace_back(target_id(k), target_pos_[k]);
    graph_.emplace(std::move(positions), cfg_.comm_range);
  }

  static constexpr int kPlacementAttempts = 10000;

  EnvConfig cfg_;
  LtiModel model_;
  SafetyParams safety_;
  Rng rng_;

  std::vector<AgentState> states_;
  std::vector<SetpointTracker> trackers_;
  std::vector<Eigen::Vector2d> target_pos_;
  std::vector<Eigen::Vector2d> target_waypoint_;
  std::vector<int> target_pause_;
  std::optional<CommGraph> graph_;
  std::vector<ActionPair> last_actions_;
  std::vector<std::uint8_t> last_blocked_;
  std::vector<std::pair<int, int>> last_pairs_;
  int t_ = 0;
  long round_counter_ = 0;
  long episode_activations_ = 0;
  RoundObserver round_observer_;
};

}  // namespace netbridge
