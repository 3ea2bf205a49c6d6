#pragma once

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <string>

#include "netbridge/checkpoint.hpp"
#include "netbridge/learner.hpp"
#include "netbridge/metrics.hpp"
#include "netbridge/run_config.hpp"
#include "netbridge/trajectory_log.hpp"
#include "netbridge/verify.hpp"
#include "netbridge/version.hpp"

namespace netbridge {

namespace detail {

inline double ms_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

inline int cmd_train(const std::string& config_path, const std::string& variant_flag,
                     long steps_override, const std::string& output_override) {
  RunConfig rc = load_run_config(config_path);
  if (!variant_flag.empty()) rc.env.variant = variant_from_string(variant_flag);
  if (steps_override >= 0) rc.train.total_steps = steps_override;
  if (!output_override.empty()) rc.output_dir = output_override;
  std::filesystem::create_directories(rc.output_dir);

  const std::string fingerprint = config_fingerprint(rc.env, rc.train.hidden_dim);
  const std::string run_id = "train-" + std::string(to_string(rc.env.variant)) + "-seed" +
                             std::to_string(rc.train.seed);
  std::cout << "training variant " << to_string(rc.env.variant) << " for "
            << rc.train.total_steps << " steps (config " << fingerprint << ")\n";

  const auto t0 = std::chrono::steady_clock::now();
  const TrainResult tr = train(rc.env, rc.train);

  MetricsWriter metrics(rc.output_dir + "/train_metrics.jsonl");
  for (const auto& ep : tr.curve) {
    MetricsRecord rec;
    rec.run_id = run_id;
    rec.variant = to_string(rc.env.variant);
    rec.kind = "train_episode";
    rec.episode = ep.episode;
    rec.coverage_pct = 0.0;  // coverage is an evaluation metric
    rec.safety_activations = ep.safety_activations;
    rec.episode_return = ep.episode_return;
    rec.wall_clock_ms = ms_since(t0);
    metrics.write(rec);
  }
  metrics.flush();

  const std::string ckpt = rc.output_dir + "/checkpoint.json";
  save_checkpoint(ckpt, tr.params, rc.env, rc.train);
  std::cout << "episodes: " << tr.curve.size() << ", updates: " << tr.updates << "\n"
            << "checkpoint: " << ckpt << "\n"
            << "metrics:    " << rc.output_dir << "/train_metrics.jsonl\n";
  return 0;
}

inline int cmd_eval(const std::string& checkpoint_path, int episodes, std::uint64_t seed_base,
                    const std::string& config_path, const std::string& metrics_path,
                    const std::string& traj_dir) {
  Checkpoint cp = load_checkpoint(checkpoint_path);
  EnvConfig env_cfg = cp.env;
  if (!config_path.empty()) {
    RunConfig rc = load_run_config(config_path);
    env_cfg = rc.env;
    const QNetConfig expected = QNetConfig::for_variant(env_cfg.variant, cp.train.hidden_dim);
    if (!(expected == cp.params.cfg)) {
      throw ConfigError("checkpoint feature dims (node " + std::to_string(cp.params.cfg.node_dim) +
                        ", edge " + std::to_string(cp.params.cfg.edge_dim) +
                        ") do not match the requested config's variant " +
                        to_string(env_cfg.variant));
    }
  }

  const auto t0 = std::chrono::steady_clock::now();
  std::unique_ptr<TrajectoryWriter> traj;
  std::uint64_t traj_seed = 0;
  std::function<void(const Env&, std::uint64_t, const std::vector<ActionPair>&, const StepResult&)>
      hook;
  EnvConfig logged_cfg = env_cfg;
  logged_cfg.filter_override = true;  // evaluation protocol
  if (!traj_dir.empty()) {
    std::filesystem::create_directories(traj_dir);
    hook = [&](const Env& env, std::uint64_t seed, const std::vector<ActionPair>& actions,
               const StepResult& sr) {
      if (!traj || seed != traj_seed) {
        traj = std::make_unique<TrajectoryWriter>(
            traj_dir + "/episode_" + std::to_string(seed) + ".jsonl", logged_cfg, seed,
            cp.train.hidden_dim);
        traj_seed = seed;
      }
      traj->record(env, actions, sr);
    };
  }

  const EvalSummary summary = evaluate(cp.params, env_cfg, episodes, seed_base, hook);
  traj.reset();

  const std::string out_path =
      metrics_path.empty() ? "eval_metrics.jsonl" : metrics_path;
  MetricsWriter metrics(out_path);
  const std::string run_id = "eval-" + std::string(to_string(env_cfg.variant)) + "-seed" +
                             std::to_string(seed_base);
  for (const auto& ep : summary.episodes) {
    MetricsRecord rec;
    rec.run_id = run_id;
    rec.variant = to_string(env_cfg.variant);
    rec.kind = "eval_episode";
    rec.episode = ep.episode;
    rec.coverage_pct = ep.coverage_pct;
    rec.safety_activations = ep.safety_activations;
    rec.episode_return = ep.episode_return;
    rec.wall_clock_ms = ms_since(t0);
    metrics.write(rec);
  }
  metrics.flush();

  std::cout << format_eval_table(to_string(env_cfg.variant), summary);
  std::cout << "metrics: " << out_path << "\n";
  return 0;
}

inline int cmd_verify(const std::string& suite, std::uint64_t seed, long trials) {
  bool all_pass = true;
  auto run = [&](const SuiteReport& report) {
    std::cout << report.to_text();
    all_pass = all_pass && report.pass();
  };
  if (suite == "geometry" || suite == "all") run(verify_geometry(seed, trials));
  if (suite == "filter" || suite == "all") run(verify_filter(seed));
  if (suite == "env" || suite == "all") run(verify_env(seed));
  std::cout << (all_pass ? "verify: all checks passed\n" : "verify: FAILURES detected\n");
  return all_pass ? 0 : 2;
}

inline int cmd_replay(const std::string& log_path) {
  const ReplayReport report = replay_trajectory(log_path);
  std::cout << "replay ok: " << report.steps_checked << " steps bit-identical (seed "
            << report.episode_seed << ", config " << report.fingerprint << ")\n";
  return 0;
}

}  // namespace detail

/// Entry point behind the `netbridge` binary. Exit codes: 0 success,
/// 1 usage/validation error, 2 runtime failure (including divergence and
/// failed verification).
inline int cli_main(int argc, const char* const* argv) {
  CLI::App app{"netbridge: safe decentralized setpoint tracking and network-bridging MARL"};
  app.set_version_flag("--version", std::string(kVersion));
  bool print_schema = false;
  app.add_flag("--print-schema", print_schema, "print the config document schema and exit");

  auto* train_cmd = app.add_subcommand("train", "train a variant and write a checkpoint");
  std::string train_config;
  std::string train_variant;
  long train_steps = -1;
  std::string train_output;
  train_cmd->add_option("--config", train_config, "config file (JSON)")->required();
  train_cmd->add_option("--variant", train_variant,
                        "override variant: baseline|a|a-node|b|c");
  train_cmd->add_option("--steps", train_steps, "override train.total_steps");
  train_cmd->add_option("--output", train_output, "override output directory");

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint (filter always on)");
  std::string eval_checkpoint;
  int eval_episodes = 100;
  std::uint64_t eval_seed_base = 10000;
  std::string eval_config;
  std::string eval_metrics;
  std::string eval_traj;
  eval_cmd->add_option("--checkpoint", eval_checkpoint, "checkpoint file")->required();
  eval_cmd->add_option("--episodes", eval_episodes, "number of evaluation episodes");
  eval_cmd->add_option("--seed-base", eval_seed_base, "first episode seed");
  eval_cmd->add_option("--config", eval_config, "optional env config override");
  eval_cmd->add_option("--metrics", eval_metrics, "metrics output path (JSONL)");
  eval_cmd->add_option("--traj", eval_traj, "directory for per-episode trajectory logs");

  auto* verify_cmd = app.add_subcommand("verify", "run the verification suites");
  std::string verify_suite = "all";
  std::uint64_t verify_seed = 2024;
  long verify_trials = 10000;
  verify_cmd->add_option("--suite", verify_suite, "geometry|filter|env|all")
      ->check(CLI::IsMember({"geometry", "filter", "env", "all"}));
  verify_cmd->add_option("--seed", verify_seed, "suite seed");
  verify_cmd->add_option("--trials", verify_trials, "geometry trials");

  auto* replay_cmd = app.add_subcommand("replay", "re-simulate a trajectory log and compare");
  std::string replay_log;
  replay_cmd->add_option("--log", replay_log, "trajectory log file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints help or the usage error
    return code == 0 ? 0 : 1;
  }

  try {
    if (print_schema) {
      std::cout << config_schema_text();
      return 0;
    }
    if (*train_cmd) return detail::cmd_train(train_config, train_variant, train_steps, train_output);
    if (*eval_cmd) {
      return detail::cmd_eval(eval_checkpoint, eval_episodes, eval_seed_base, eval_config,
                              eval_metrics, eval_traj);
    }
    if (*verify_cmd) return detail::cmd_verify(verify_suite, verify_seed, verify_trials);
    if (*replay_cmd) return detail::cmd_replay(replay_log);
    std::cout << app.help();
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const VersionMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const Divergence& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace netbridge
