#pragma once

#include <cstdint>
#include <fstream>
#include <json.hpp>
#include <string>
#include <vector>

#include "netbridge/env.hpp"
#include "netbridge/errors.hpp"
#include "netbridge/learner.hpp"

namespace netbridge {

using Json = nlohmann::json;

struct RunConfig {
  EnvConfig env;
  TrainConfig train;
  std::string output_dir = "out";
};

namespace detail {

inline void reject_unknown_keys(const Json& obj, const std::vector<std::string>& allowed,
                                const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

template <class T>
void read_field(const Json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

}  // namespace detail

inline Json env_config_to_json(const EnvConfig& c) {
  Json j;
  j["n_agents"] = c.n_agents;
  j["comm_range"] = c.comm_range;
  j["episode_len"] = c.episode_len;
  j["action_offset"] = c.action_offset;
  j["target_pause"] = c.target_pause;
  j["target_speed"] = c.target_speed;
  j["variant"] = to_string(c.variant);
  j["penalty_value"] = c.penalty_value;
  j["centroid_penalty_scale"] = c.centroid_penalty_scale;
  j["model"] = c.model;
  j["physics_dt"] = c.physics_dt;
  j["physics_substeps"] = c.physics_substeps;
  j["seed"] = c.seed;
  j["q_scale"] = c.q_scale;
  j["level_margin"] = c.level_margin;
  j["s_over_c"] = c.s_over_c;
  j["level_c"] = c.level_c;
  j["deadlock_threshold"] = c.deadlock_threshold;
  j["update_order"] = c.update_order == UpdateOrder::Fixed ? "fixed" : "round-robin";
  if (c.filter_override) j["filter_override"] = *c.filter_override;
  if (!c.fixed_agent_positions.empty()) {
    Json arr = Json::array();
    for (const auto& p : c.fixed_agent_positions) arr.push_back({p.x(), p.y()});
    j["fixed_agent_positions"] = arr;
  }
  if (!c.fixed_target_positions.empty()) {
    Json arr = Json::array();
    for (const auto& p : c.fixed_target_positions) arr.push_back({p.x(), p.y()});
    j["fixed_target_positions"] = arr;
  }
  if (c.freeze_targets) j["freeze_targets"] = true;
  return j;
}

inline EnvConfig env_config_from_json(const Json& j, const std::string& where = "env") {
  detail::reject_unknown_keys(
      j,
      {"n_agents", "comm_range", "episode_len", "action_offset", "target_pause", "target_speed",
       "variant", "penalty_value", "centroid_penalty_scale", "model", "physics_dt",
       "physics_substeps", "seed", "q_scale", "level_margin", "s_over_c", "level_c",
       "deadlock_threshold", "update_order", "filter_override", "fixed_agent_positions",
       "fixed_target_positions", "freeze_targets"},
      where);
  EnvConfig c;
  detail::read_field(j, "n_agents", c.n_agents, where);
  detail::read_field(j, "comm_range", c.comm_range, where);
  detail::read_field(j, "episode_len", c.episode_len, where);
  detail::read_field(j, "action_offset", c.action_offset, where);
  detail::read_field(j, "target_pause", c.target_pause, where);
  detail::read_field(j, "target_speed", c.target_speed, where);
  if (j.contains("variant")) c.variant = variant_from_string(j.at("variant").get<std::string>());
  detail::read_field(j, "penalty_value", c.penalty_value, where);
  detail::read_field(j, "centroid_penalty_scale", c.centroid_penalty_scale, where);
  detail::read_field(j, "model", c.model, where);
  detail::read_field(j, "physics_dt", c.physics_dt, where);
  detail::read_field(j, "physics_substeps", c.physics_substeps, where);
  detail::read_field(j, "seed", c.seed, where);
  detail::read_field(j, "q_scale", c.q_scale, where);
  detail::read_field(j, "level_margin", c.level_margin, where);
  detail::read_field(j, "s_over_c", c.s_over_c, where);
  detail::read_field(j, "level_c", c.level_c, where);
  detail::read_field(j, "deadlock_threshold", c.deadlock_threshold, where);
  if (j.contains("update_order")) {
    const std::string o = j.at("update_order").get<std::string>();
    if (o == "fixed") {
      c.update_order = UpdateOrder::Fixed;
    } else if (o == "round-robin") {
      c.update_order = UpdateOrder::RoundRobin;
    } else {
      throw ConfigError(where + ".update_order: expected fixed|round-robin, got '" + o + "'");
    }
  }
  if (j.contains("filter_override")) c.filter_override = j.at("filter_override").get<bool>();
  auto read_points = [&](const char* key, std::vector<Eigen::Vector2d>& out) {
    if (!j.contains(key)) return;
    for (const auto& p : j.at(key)) {
      if (!p.is_array() || p.size() != 2) throw ConfigError(where + "." + key + ": expected [x, y] pairs");
      out.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
  };
  read_points("fixed_agent_positions", c.fixed_agent_positions);
  read_points("fixed_target_positions", c.fixed_target_positions);
  detail::read_field(j, "freeze_targets", c.freeze_targets, where);
  return c;
}

inline Json train_config_to_json(const TrainConfig& c) {
  Json j;
  j["total_steps"] = c.total_steps;
  j["batch_size"] = c.batch_size;
  j["discount"] = c.discount;
  j["learning_rate"] = c.learning_rate;
  j["target_sync_interval"] = c.target_sync_interval;
  j["epsilon_start"] = c.epsilon_start;
  j["epsilon_final"] = c.epsilon_final;
  j["epsilon_anneal_frac"] = c.epsilon_anneal_frac;
  j["buffer_capacity"] = c.buffer_capacity;
  j["warmup_transitions"] = c.warmup_transitions;
  j["grad_clip_norm"] = c.grad_clip_norm;
  j["hidden_dim"] = c.hidden_dim;
  j["seed"] = c.seed;
  return j;
}

inline TrainConfig train_config_from_json(const Json& j, const std::string& where = "train") {
  detail::reject_unknown_keys(
      j,
      {"total_steps", "batch_size", "discount", "learning_rate", "target_sync_interval",
       "epsilon_start", "epsilon_final", "epsilon_anneal_frac", "buffer_capacity",
       "warmup_transitions", "grad_clip_norm", "hidden_dim", "seed"},
      where);
  TrainConfig c;
  detail::read_field(j, "total_steps", c.total_steps, where);
  detail::read_field(j, "batch_size", c.batch_size, where);
  detail::read_field(j, "discount", c.discount, where);
  detail::read_field(j, "learning_rate", c.learning_rate, where);
  detail::read_field(j, "target_sync_interval", c.target_sync_interval, where);
  detail::read_field(j, "epsilon_start", c.epsilon_start, where);
  detail::read_field(j, "epsilon_final", c.epsilon_final, where);
  detail::read_field(j, "epsilon_anneal_frac", c.epsilon_anneal_frac, where);
  detail::read_field(j, "buffer_capacity", c.buffer_capacity, where);
  detail::read_field(j, "warmup_transitions", c.warmup_transitions, where);
  detail::read_field(j, "grad_clip_norm", c.grad_clip_norm, where);
  detail::read_field(j, "hidden_dim", c.hidden_dim, where);
  detail::read_field(j, "seed", c.seed, where);
  if (c.discount < 0.0 || c.discount > 1.0) {
    throw ConfigError(where + ".discount must lie in [0, 1]");
  }
  return c;
}

inline Json run_config_to_json(const RunConfig& c) {
  Json j;
  j["env"] = env_config_to_json(c.env);
  j["train"] = train_config_to_json(c.train);
  j["output_dir"] = c.output_dir;
  return j;
}

inline RunConfig run_config_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  detail::reject_unknown_keys(j, {"env", "train", "output_dir"}, "config");
  RunConfig c;
  if (j.contains("env")) c.env = env_config_from_json(j.at("env"));
  if (j.contains("train")) c.train = train_config_from_json(j.at("train"));
  detail::read_field(j, "output_dir", c.output_dir, "config");
  return c;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  return run_config_from_json(j);
}

/// FNV-1a over the canonical dump of the structural configuration (seeds and
/// output paths excluded). Stored in checkpoints, logs, and metrics so
/// artifacts produced under different configurations cannot be mixed up.
inline std::string config_fingerprint(const EnvConfig& env, int hidden_dim) {
  Json j = env_config_to_json(env);
  j.erase("seed");
  j["hidden_dim"] = hidden_dim;
  const std::string dump = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : dump) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

/// Human-readable description of the config document accepted by --config.
inline std::string config_schema_text() {
  return R"(Configuration document (JSON object). All keys optional; defaults shown.

"env": environment and safety geometry
  n_agents                int     3        number of agents (>= 2)
  comm_range              float   0.20     edge threshold of the communication graph
  episode_len             int     100      decision steps per episode
  action_offset           float   0.05     target-point offset per axis per action
  target_pause            int     5        steps a target pauses at a waypoint
  target_speed            float   0.02     target speed (grid units per step)
  variant                 string  "a"      baseline | a | a-node | b | c
  penalty_value           float   -10.0    per-blocked-agent reward penalty (b, c)
  centroid_penalty_scale  float   1.0      scale of the centroid distance penalty
  model                   string  "planar-2d"  planar-2d | quad-12
  physics_dt              float   0.02     physics integration step (seconds)
  physics_substeps        int     10       physics substeps per decision step
  seed                    uint    1        episode seed base
  q_scale                 float   1.0      Lyapunov equation right-hand side Q = q_scale * I
  level_margin            float   0.95     fraction of the max ball-compatible level c
  s_over_c                float   0.5      inner level s as a fraction of c
  level_c                 float   0.0      explicit level c (0 = auto-size)
  deadlock_threshold      int     10       consecutive refusals flagged as deadlock
  update_order            string  "fixed"  fixed | round-robin
  filter_override         bool    (unset)  force the safety filter on/off
  fixed_agent_positions   [[x,y]] (unset)  pinned initial agent positions (scenarios)
  fixed_target_positions  [[x,y]] (unset)  pinned target positions (scenarios)
  freeze_targets          bool    false    disable target motion (scenarios)

"train": learner settings
  total_steps             int     50000    environment steps to train for
  batch_size              int     64
  discount                float   0.99
  learning_rate           float   3e-4
  target_sync_interval    int     1000     updates between target-network syncs
  epsilon_start           float   1.0
  epsilon_final           float   0.05
  epsilon_anneal_frac     float   0.2      fraction of total_steps to anneal over
  buffer_capacity         int     100000
  warmup_transitions      int     1000
  grad_clip_norm          float   10.0
  hidden_dim              int     32
  seed                    uint    1        learner seed (init, exploration, batches)

"output_dir": string, default "out"

Unknown keys are rejected.
)";
}

}  // namespace netbridge
