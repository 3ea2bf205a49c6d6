#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "netbridge/env.hpp"
#include "netbridge/errors.hpp"
#include "netbridge/run_config.hpp"
#include "netbridge/version.hpp"

namespace netbridge {

namespace detail {

inline Json vector_to_json(const Eigen::VectorXd& v) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

inline Eigen::VectorXd vector_from_json(const Json& arr) {
  Eigen::VectorXd v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  return v;
}

}  // namespace detail

/// Line-delimited trajectory log: one JSON header line (format version,
/// config, episode seed), then one JSON record per step. Values round-trip
/// bit-exactly through the JSON number formatter, which is what replay
/// relies on.
class TrajectoryWriter {
 public:
  TrajectoryWriter(const std::string& path, const EnvConfig& env, std::uint64_t episode_seed,
                   int hidden_dim_for_fingerprint = 0)
      : out_(path) {
    if (!out_) throw Error("cannot open trajectory log for writing: " + path);
    Json header;
    header["format"] = "netbridge-traj";
    header["version"] = kTrajectoryFormatVersion;
    header["lib_version"] = kVersion;
    header["config_fingerprint"] = config_fingerprint(env, hidden_dim_for_fingerprint);
    header["env"] = env_config_to_json(env);
    header["episode_seed"] = episode_seed;
    out_ << header.dump() << "\n";
  }

  void record(const Env& env, const std::vector<ActionPair>& actions, const StepResult& sr) {
    Json j;
    j["t"] = env.time_step() - 1;  // step() already advanced the counter
    Json acts = Json::array();
    for (const auto& a : actions) acts.push_back(a.index());
    j["actions"] = std::move(acts);
    j["reward"] = sr.reward;
    j["breakdown"] = {{"base", sr.breakdown.base},
                      {"centroid_penalty", sr.breakdown.centroid_penalty},
                      {"path_bonus", sr.breakdown.path_bonus},
                      {"total", sr.breakdown.total}};
    j["done"] = sr.done;
    j["safety_truncated"] = sr.safety_truncated;
    Json agents = Json::array();
    for (int i = 0; i < env.config().n_agents; ++i) {
      Json a;
      a["x"] = detail::vector_to_json(env.agent_states()[i].x);
      a["sp"] = detail::vector_to_json(env.trackers()[i].x_sp);
      agents.push_back(std::move(a));
    }
    j["agents"] = std::move(agents);
    Json targets = Json::array();
    for (const auto& t : env.target_positions()) targets.push_back({t.x(), t.y()});
    j["targets"] = std::move(targets);
    Json blocked = Json::array();
    for (std::size_t i = 0; i < sr.info.agent_blocked.size(); ++i) {
      if (sr.info.agent_blocked[i]) blocked.push_back(static_cast<int>(i));
    }
    j["blocked"] = std::move(blocked);
    Json pairs = Json::array();
    for (const auto& [a, b] : sr.info.blocked_pairs) pairs.push_back({a, b});
    j["blocked_pairs"] = std::move(pairs);
    Json edges = Json::array();
    for (const auto& [u, v] : env.graph().edges()) edges.push_back({to_string(u), to_string(v)});
    j["edges"] = std::move(edges);
    out_ << j.dump() << "\n";
  }

 private:
  std::ofstream out_;
};

struct ReplayReport {
  long steps_checked = 0;
  std::uint64_t episode_seed = 0;
  std::string fingerprint;
};

/// Re-simulates a logged episode from its seed and action sequence and
/// demands bit-identical states, setpoints, rewards, and target positions.
/// Throws Divergence at the first mismatch, VersionMismatch for foreign
/// logs, ConfigError for malformed files.
inline ReplayReport replay_trajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trajectory log: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("trajectory log is empty: " + path);
  Json header;
  try {
    header = Json::parse(line);
  } catch (const Json::exception& e) {
    throw ConfigError("trajectory header parse error: " + std::string(e.what()));
  }
  if (header.value("format", "") != "netbridge-traj") {
    throw ConfigError("not a trajectory log: " + path);
  }
  if (header.value("version", -1) != kTrajectoryFormatVersion) {
    throw VersionMismatch("trajectory format version " +
                          std::to_string(header.value("version", -1)) + " != " +
                          std::to_string(kTrajectoryFormatVersion));
  }

  ReplayReport report;
  report.fingerprint = header.value("config_fingerprint", "");
  report.episode_seed = header.at("episode_seed").get<std::uint64_t>();
  const EnvConfig cfg = env_config_from_json(header.at("env"), "trajectory env");

  Env env(cfg);
  env.reset(report.episode_seed);
  long step_no = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Json rec;
    try {
      rec = Json::parse(line);
    } catch (const Json::exception& e) {
      throw ConfigError("trajectory record parse error at step " + std::to_string(step_no) +
                        ": " + e.what());
    }
    std::vector<ActionPair> actions;
    for (const auto& a : rec.at("actions")) actions.push_back(ActionPair::from_index(a.get<int>()));
    const StepResult sr = env.step(actions);

    if (rec.at("reward").get<double>() != sr.reward) {
      throw Divergence(step_no, "reward mismatch");
    }
    if (rec.at("breakdown").at("total").get<double>() != sr.breakdown.total) {
      throw Divergence(step_no, "reward breakdown mismatch");
    }
    if (rec.at("done").get<bool>() != sr.done ||
        rec.at("safety_truncated").get<bool>() != sr.safety_truncated) {
      throw Divergence(step_no, "termination flag mismatch");
    }
    const Json& agents = rec.at("agents");
    for (int i = 0; i < cfg.n_agents; ++i) {
      const Eigen::VectorXd x = detail::vector_from_json(agents.at(i).at("x"));
      const Eigen::VectorXd sp = detail::vector_from_json(agents.at(i).at("sp"));
      if (x != env.agent_states()[i].x) {
        throw Divergence(step_no, "agent " + std::to_string(i) + " state mismatch");
      }
      if (sp != env.trackers()[i].x_sp) {
        throw Divergence(step_no, "agent " + std::to_string(i) + " setpoint mismatch");
      }
    }
    const Json& targets = rec.at("targets");
    for (int k = 0; k < 2; ++k) {
      const Eigen::Vector2d t(targets.at(k).at(0).get<double>(), targets.at(k).at(1).get<double>());
      if (t != env.target_positions()[k]) {
        throw Divergence(step_no, "target " + std::to_string(k) + " position mismatch");
      }
    }
    ++step_no;
    if (sr.done) break;
  }
  if (step_no == 0) throw ConfigError("trajectory log holds no step records: " + path);
  report.steps_checked = step_no;
  return report;
}

}  // namespace netbridge
