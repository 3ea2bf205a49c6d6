#pragma once

#include <Eigen/Dense>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "netbridge/ellipsoid.hpp"
#include "netbridge/env.hpp"
#include "netbridge/learner.hpp"
#include "netbridge/rng.hpp"
#include "netbridge/safety_filter.hpp"

namespace netbridge {

// ---------------------------------------------------------------------------
// Oracles. These decide intersection by explicit membership tests of sampled
// points, never by the 4c distance inequality they are used to check.
// ---------------------------------------------------------------------------

/// Membership sampling along the segment between the centers. For two
/// ellipsoids sharing P and c the intersection, when nonempty, always
/// contains the Euclidean midpoint (whitening P maps both sets to equal-radius
/// balls), so a segment sweep that includes lambda = 0.5 decides exactly.
inline bool oracle_intersect_segment(const SpdMatrix& p, double c, const Eigen::VectorXd& ci,
                                     const Eigen::VectorXd& cj, int samples = 1001) {
  for (int k = 0; k < samples; ++k) {
    const double lam = static_cast<double>(k) / (samples - 1);
    const Eigen::VectorXd x = ci + lam * (cj - ci);
    if (p_norm_sq(p, x, ci) <= c && p_norm_sq(p, x, cj) <= c) return true;
  }
  return false;
}

/// Dense 2-D grid sweep over the bounding box of E_c(ci): intersects iff some
/// grid point is a member of both sets.
inline bool oracle_intersect_grid2d(const SpdMatrix& p, double c, const Eigen::Vector2d& ci,
                                    const Eigen::Vector2d& cj, double grid_step = 0.01) {
  const Eigen::MatrixXd sigma = p.inverse();
  const double bx = std::sqrt(c * sigma(0, 0));
  const double by = std::sqrt(c * sigma(1, 1));
  Eigen::VectorXd x(2), a(2), b(2);
  a << ci.x(), ci.y();
  b << cj.x(), cj.y();
  for (double gx = ci.x() - bx; gx <= ci.x() + bx + 0.5 * grid_step; gx += grid_step) {
    for (double gy = ci.y() - by; gy <= ci.y() + by + 0.5 * grid_step; gy += grid_step) {
      x << gx, gy;
      if (p_norm_sq(p, x, a) <= c && p_norm_sq(p, x, b) <= c) return true;
    }
  }
  return false;
}

/// Random SPD matrix built as L L^T from a seeded lower-triangular factor
/// with a floor on the diagonal.
inline SpdMatrix random_spd(int n, Rng& rng) {
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < i; ++j) l(i, j) = 0.3 * rng.normal();
    l(i, i) = 0.5 + std::abs(rng.normal());
  }
  return SpdMatrix(l * l.transpose());
}

// ---------------------------------------------------------------------------
// Suites
// ---------------------------------------------------------------------------

struct CheckLine {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct SuiteReport {
  std::string suite;
  std::vector<CheckLine> checks;

  bool pass() const {
    for (const auto& c : checks) {
      if (!c.pass) return false;
    }
    return true;
  }

  void add(const std::string& name, bool ok, const std::string& detail = "") {
    checks.push_back({name, ok, detail});
  }

  std::string to_text() const {
    std::ostringstream os;
    for (const auto& c : checks) {
      os << (c.pass ? "[PASS] " : "[FAIL] ") << suite << ": " << c.name;
      if (!c.detail.empty()) os << " (" << c.detail << ")";
      os << "\n";
    }
    return os.str();
  }
};

/// Randomized equivalence check of the 4c intersection inequality against the
/// membership-sampling oracle, boundary band excluded.
inline SuiteReport verify_geometry(std::uint64_t seed, long trials) {
  SuiteReport report{"geometry", {}};
  Rng rng(seed);
  long compared = 0;
  long agreements = 0;
  long skipped = 0;
  const double c = 1.0;
  for (long t = 0; t < trials; ++t) {
    const int n = 2 + static_cast<int>(t % 3);
    const SpdMatrix p = random_spd(n, rng);
    Eigen::VectorXd ci(n);
    for (int i = 0; i < n; ++i) ci[i] = rng.uniform(-1.0, 1.0);
    const Eigen::VectorXd dir = rng.unit_vector(n);
    const double dir_pnorm = std::sqrt(dir.dot(p.entries() * dir));
    // Center distance spread around the decision threshold 2*sqrt(c).
    const double target = rng.uniform(0.2, 1.8) * 2.0 * std::sqrt(c);
    const Eigen::VectorXd cj = ci + (target / dir_pnorm) * dir;

    const double dist_sq = p_norm_sq(p, cj, ci);
    if (std::abs(dist_sq - 4.0 * c) <= 1e-6 * 4.0 * c) {
      ++skipped;
      continue;
    }
    ++compared;
    if (ellipsoids_intersect(p, c, ci, cj) == oracle_intersect_segment(p, c, ci, cj)) {
      ++agreements;
    }
  }
  std::ostringstream detail;
  detail << agreements << "/" << compared << " agree, " << skipped << " in boundary band";
  report.add("4c test matches sampling oracle", agreements == compared, detail.str());

  // Pinned cases.
  const SpdMatrix eye2 = SpdMatrix::identity(2);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(2);
  Eigen::VectorXd d3(2), d2(2), d21(2);
  d3 << 3.0, 0.0;
  d2 << 2.0, 0.0;
  d21 << 2.1, 0.0;
  report.add("coincident centers intersect", ellipsoids_intersect(eye2, 1.0, z, z));
  report.add("distance 3 disjoint (grid oracle agrees)",
             !ellipsoids_intersect(eye2, 1.0, z, d3) &&
                 !oracle_intersect_grid2d(eye2, 1.0, {0.0, 0.0}, {3.0, 0.0}));
  report.add("tangency counts as intersection", ellipsoids_intersect(eye2, 1.0, z, d2));
  report.add("||d||^2 = 4.41c disjoint per both methods",
             !ellipsoids_intersect(eye2, 1.0, z, d21) &&
                 !oracle_intersect_segment(eye2, 1.0, z, d21));
  return report;
}

// ---------------------------------------------------------------------------
// Scripted adversarial scenarios for the filter suite.
// ---------------------------------------------------------------------------

/// Drives each agent straight at a fixed goal point, reading its own
/// position from the ego observation features.
class ScriptedGoalPolicy {
 public:
  explicit ScriptedGoalPolicy(std::vector<Eigen::Vector2d> goals) : goals_(std::move(goals)) {}
  void reset() {}

  std::vector<ActionPair> act(const std::vector<Observation>& obs) {
    std::vector<ActionPair> actions;
    for (std::size_t i = 0; i < obs.size(); ++i) {
      const Eigen::Vector2d pos(obs[i].ego[1], obs[i].ego[2]);
      const Eigen::Vector2d delta = goals_[i] - pos;
      auto quantize = [](double v) { return v > 1e-6 ? 1 : (v < -1e-6 ? -1 : 0); };
      actions.push_back(ActionPair{quantize(delta.x()), quantize(delta.y())});
    }
    return actions;
  }

 private:
  std::vector<Eigen::Vector2d> goals_;
};

struct ScenarioSpec {
  std::string name;
  std::vector<Eigen::Vector2d> start;
  std::vector<Eigen::Vector2d> goals;
};

inline std::vector<ScenarioSpec> adversarial_scenarios() {
  std::vector<ScenarioSpec> out;
  out.push_back({"head-on",
                 {{0.30, 0.50}, {0.70, 0.50}},
                 {{0.70, 0.50}, {0.30, 0.50}}});
  ScenarioSpec ring{"converging-ring", {}, {}};
  for (int k = 0; k < 6; ++k) {
    const double ang = 2.0 * M_PI * k / 6.0;
    ring.start.emplace_back(0.5 + 0.35 * std::cos(ang), 0.5 + 0.35 * std::sin(ang));
    ring.goals.emplace_back(0.5, 0.5);
  }
  out.push_back(std::move(ring));
  out.push_back({"crossing-paths",
                 {{0.20, 0.20}, {0.80, 0.20}, {0.80, 0.80}, {0.20, 0.80}},
                 {{0.80, 0.80}, {0.20, 0.80}, {0.20, 0.20}, {0.80, 0.20}}});
  return out;
}

struct ScenarioResult {
  std::string name;
  int steps = 0;
  long activations = 0;
  long intersection_violations = 0;
  long containment_violations = 0;
  long locality_violations = 0;
  long collision_events = 0;
  long deadlocked_agent_steps = 0;
};

/// Runs one scenario under variant A with a per-round safety audit:
/// pairwise non-intersection of all setpoints, state containment in E_c of a
/// freshly accepted setpoint, graph adjacency of every blocking pair, and
/// coincidence of any two agent states.
inline ScenarioResult run_scenario(const ScenarioSpec& spec, int episode_len,
                                   std::uint64_t seed = 7) {
  EnvConfig cfg;
  cfg.n_agents = static_cast<int>(spec.start.size());
  cfg.variant = Variant::A;
  cfg.episode_len = episode_len;
  cfg.fixed_agent_positions = spec.start;
  cfg.fixed_target_positions = {Eigen::Vector2d(0.02, 0.02), Eigen::Vector2d(0.98, 0.98)};
  cfg.freeze_targets = true;
  cfg.seed = seed;

  Env env(cfg);
  ScenarioResult result;
  result.name = spec.name;

  env.set_round_observer([&](const CommGraph& graph, const std::vector<SetpointTracker>& trackers,
                             const std::vector<AgentState>& states,
                             const std::vector<SafetyDecision>& decisions) {
    const SafetyParams& sp = env.safety();
    for (std::size_t i = 0; i < trackers.size(); ++i) {
      for (std::size_t j = i + 1; j < trackers.size(); ++j) {
        if (ellipsoids_intersect(sp.p, sp.c, trackers[i].x_sp, trackers[j].x_sp)) {
          ++result.intersection_violations;
        }
        if ((env.model().planar_position(states[i].x) - env.model().planar_position(states[j].x))
                .norm() < 1e-9) {
          ++result.collision_events;
        }
      }
    }
    for (const auto& d : decisions) {
      if (d.updated &&
          p_norm_sq(sp.p, states[d.agent_id].x, trackers[d.agent_id].x_sp) > sp.c * (1.0 + 1e-9)) {
        ++result.containment_violations;
      }
      for (int j : d.blockers) {
        if (!graph.adjacent(agent_id(d.agent_id), agent_id(j))) {
          ++result.locality_violations;
        }
      }
    }
  });

  ScriptedGoalPolicy policy(spec.goals);
  std::vector<Observation> obs = env.reset(seed);
  bool done = false;
  while (!done) {
    const StepResult sr = env.step(policy.act(obs));
    result.activations += sr.info.activation_count;
    for (const auto flag : sr.info.agent_deadlocked) result.deadlocked_agent_steps += flag;
    obs = sr.obs;
    done = sr.done;
    ++result.steps;
  }
  return result;
}

inline SuiteReport verify_filter(std::uint64_t seed, int episode_len = 1000) {
  SuiteReport report{"filter", {}};
  for (const auto& spec : adversarial_scenarios()) {
    const ScenarioResult r = run_scenario(spec, episode_len, seed);
    std::ostringstream detail;
    detail << r.steps << " steps, " << r.activations << " activations, "
           << r.intersection_violations << " intersections, " << r.collision_events
           << " collisions, " << r.locality_violations << " locality, "
           << r.containment_violations << " containment";
    const bool ok = r.intersection_violations == 0 && r.collision_events == 0 &&
                    r.locality_violations == 0 && r.containment_violations == 0;
    report.add(r.name, ok, detail.str());
    if (spec.name == "head-on") {
      report.add("head-on records activations", r.activations >= 1,
                 std::to_string(r.activations) + " activations");
    }
  }
  return report;
}

inline SuiteReport verify_env(std::uint64_t seed, int resets = 1000) {
  SuiteReport report{"env", {}};

  // Reward hand cases on constructed graphs.
  {
    std::vector<std::pair<EntityId, Eigen::Vector2d>> pos;
    pos.emplace_back(agent_id(0), Eigen::Vector2d(0.0, 0.0));
    pos.emplace_back(agent_id(1), Eigen::Vector2d(0.3, 0.0));
    pos.emplace_back(agent_id(2), Eigen::Vector2d(0.6, 0.0));
    pos.emplace_back(target_id(0), Eigen::Vector2d(0.0, 0.5));
    pos.emplace_back(target_id(1), Eigen::Vector2d(0.6, 0.5));
    CommGraph isolated(pos, 0.2);
    const RewardBreakdown iso = compute_reward(
        isolated, {{0.0, 0.0}, {0.3, 0.0}, {0.6, 0.0}}, {{0.0, 0.5}, {0.6, 0.5}});
    // all 5 entities isolated (0.3 > 0.2): base 0.2; centroid (0.3,0) vs
    // midpoint (0.3,0.5): penalty 0.5
    report.add("isolated-entities reward", std::abs(iso.base - 0.2) < 1e-15 &&
                                               std::abs(iso.total - (0.2 - 0.5)) < 1e-12,
               "base=" + std::to_string(iso.base));
  }
  {
    std::vector<std::pair<EntityId, Eigen::Vector2d>> pos;
    pos.emplace_back(target_id(0), Eigen::Vector2d(0.0, 0.0));
    pos.emplace_back(agent_id(0), Eigen::Vector2d(0.15, 0.0));
    pos.emplace_back(agent_id(1), Eigen::Vector2d(0.30, 0.0));
    pos.emplace_back(agent_id(2), Eigen::Vector2d(0.45, 0.0));
    pos.emplace_back(target_id(1), Eigen::Vector2d(0.60, 0.0));
    CommGraph chain(pos, 0.2);
    const RewardBreakdown r = compute_reward(
        chain, {{0.15, 0.0}, {0.30, 0.0}, {0.45, 0.0}}, {{0.0, 0.0}, {0.60, 0.0}});
    report.add("chain path bonus", r.total == 100.0 && r.path_bonus == 100.0);
  }

  // Batch reset property: initial setpoints pairwise safe for every seed.
  {
    EnvConfig cfg;
    cfg.variant = Variant::A;
    Env env(cfg);
    long violations = 0;
    for (int k = 0; k < resets; ++k) {
      env.reset(Rng::derive_seed(seed, k));
      if (!setpoints_pairwise_safe(env.trackers(), env.safety())) ++violations;
    }
    report.add("seeded resets keep initial setpoints safe", violations == 0,
               std::to_string(resets) + " resets, " + std::to_string(violations) + " violations");
  }

  // One random-policy episode: S_ij mirrors the previous step's blocked
  // pairs, and edge distances match positions.
  {
    EnvConfig cfg;
    cfg.variant = Variant::A;
    cfg.seed = seed;
    Env env(cfg);
    RandomPolicy policy(cfg.n_agents, Rng::derive_seed(seed, 1234));
    std::vector<Observation> obs = env.reset(seed);
    long sij_errors = 0;
    long dij_errors = 0;
    bool done = false;
    while (!done) {
      const StepResult sr = env.step(policy.act(obs));
      for (int i = 0; i < cfg.n_agents; ++i) {
        for (const auto& nb : sr.obs[i].neighbors) {
          const double dx = nb.edge[0];
          const double dy = nb.edge[1];
          if (std::abs(nb.edge[2] - std::sqrt(dx * dx + dy * dy)) > 1e-12) ++dij_errors;
          const auto pr = std::minmax(i, nb.id);
          const bool expected = std::find(sr.info.blocked_pairs.begin(),
                                          sr.info.blocked_pairs.end(),
                                          std::make_pair(pr.first, pr.second)) !=
                                sr.info.blocked_pairs.end();
          if ((nb.edge[3] != 0.0) != expected) ++sij_errors;
        }
      }
      obs = sr.obs;
      done = sr.done;
    }
    report.add("S_ij mirrors previous-round activations", sij_errors == 0,
               std::to_string(sij_errors) + " mismatches");
    report.add("edge distance equals recomputed norm", dij_errors == 0);
  }

  // Determinism spot check.
  {
    EnvConfig cfg;
    cfg.variant = Variant::A;
    Env a(cfg);
    Env b(cfg);
    a.reset(seed);
    b.reset(seed);
    bool same = true;
    for (int i = 0; i < cfg.n_agents; ++i) {
      same = same && a.agent_states()[i].x == b.agent_states()[i].x;
    }
    same = same && a.target_positions() == b.target_positions();
    report.add("reset is deterministic under seed", same);
  }

  return report;
}

}  // namespace netbridge
