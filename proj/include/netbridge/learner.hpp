#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "netbridge/env.hpp"
#include "netbridge/errors.hpp"
#include "netbridge/qnet.hpp"
#include "netbridge/rng.hpp"

namespace netbridge {

struct Transition {
  Observation obs;
  int action = 0;
  double reward = 0.0;
  Observation next_obs;
  bool done = false;
  Eigen::VectorXd h_pre;   // recurrent state fed when acting on obs
  Eigen::VectorXd h_post;  // recurrent state produced by that forward pass
};

/// FIFO ring buffer of transitions with uniform without-replacement batch
/// sampling (Floyd's algorithm).
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {}

  void push(Transition t) {
    if (data_.size() < capacity_) {
      data_.push_back(std::move(t));
    } else {
      data_[head_] = std::move(t);
      head_ = (head_ + 1) % capacity_;
    }
  }

  std::size_t size() const { return data_.size(); }
  const Transition& operator[](std::size_t i) const { return data_[i]; }

  std::vector<std::size_t> sample_indices(std::size_t batch, Rng& rng) const {
    const std::size_t n = data_.size();
    if (batch > n) batch = n;
    std::vector<std::size_t> picked;
    picked.reserve(batch);
    for (std::size_t i = n - batch; i < n; ++i) {
      const std::size_t j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i)));
      if (std::find(picked.begin(), picked.end(), j) != picked.end()) {
        picked.push_back(i);
      } else {
        picked.push_back(j);
      }
    }
    return picked;
  }

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;
  std::vector<Transition> data_;
};

struct TrainConfig {
  long total_steps = 50000;  // desk-scale default; full runs use 1,000,000
  int batch_size = 64;
  double discount = 0.99;
  double learning_rate = 3e-4;
  long target_sync_interval = 1000;
  double epsilon_start = 1.0;
  double epsilon_final = 0.05;
  double epsilon_anneal_frac = 0.2;  // anneal over the first 20% of steps
  std::size_t buffer_capacity = 100000;
  long warmup_transitions = 1000;
  double grad_clip_norm = 10.0;
  int hidden_dim = 32;
  std::uint64_t seed = 1;

  double epsilon_at(long step) const {
    if (discount < 0.0 || discount > 1.0) throw ConfigError("discount outside [0,1]");
    const double anneal_steps = epsilon_anneal_frac * static_cast<double>(total_steps);
    if (anneal_steps <= 0.0) return epsilon_final;
    const double frac = std::min(1.0, static_cast<double>(step) / anneal_steps);
    return epsilon_start + frac * (epsilon_final - epsilon_start);
  }
};

/// One SGD step on the mean squared one-step TD error over the batch.
/// Targets bootstrap through the target network using the stored post-step
/// recurrent state; done/truncated transitions bootstrap zero.
inline double td_update(QNetParams& params, const QNetParams& target_params,
                        const ReplayBuffer& buffer, const std::vector<std::size_t>& batch,
                        double discount, double learning_rate, double grad_clip_norm) {
  if (batch.empty()) throw Error("td_update: empty batch");
  QNetParams grads = QNetParams::zeros(params.cfg);
  double loss = 0.0;
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  for (const std::size_t idx : batch) {
    const Transition& tr = buffer[idx];
    const QNetTrace trace = forward_q(params, tr.obs, tr.h_pre);
    double y = tr.reward;
    if (!tr.done) {
      const QNetTrace tgt = forward_q(target_params, tr.next_obs, tr.h_post);
      y += discount * tgt.q.maxCoeff();
    }
    const double err = trace.q[tr.action] - y;
    loss += err * err * inv_b;
    Eigen::VectorXd dq = Eigen::VectorXd::Zero(params.cfg.actions);
    dq[tr.action] = 2.0 * err * inv_b;
    backward_q(params, trace, dq, grads);
  }
  if (!std::isfinite(loss)) {
    throw NonFiniteLoss("td_update: loss is not finite (batch size " +
                        std::to_string(batch.size()) + ")");
  }

  double norm_sq = 0.0;
  for (const Eigen::MatrixXd* g : grads.tensors()) norm_sq += g->squaredNorm();
  const double norm = std::sqrt(norm_sq);
  const double scale = (grad_clip_norm > 0.0 && norm > grad_clip_norm)
                           ? grad_clip_norm / norm
                           : 1.0;
  auto ps = params.tensors();
  auto gs = grads.tensors();
  for (std::size_t i = 0; i < ps.size(); ++i) {
    *ps[i] -= (learning_rate * scale) * *gs[i];
  }
  return loss;
}

/// Per-episode training curve entry (the quantities plotted against training
/// progress: return and filter activations), plus loop diagnostics.
struct EpisodeRecord {
  int episode = 0;
  long end_step = 0;
  int steps = 0;
  double episode_return = 0.0;
  long safety_activations = 0;
  double epsilon = 0.0;
  double mean_loss = 0.0;
};

struct TrainResult {
  QNetParams params;
  std::vector<EpisodeRecord> curve;
  long env_steps = 0;
  long updates = 0;
};

/// Decentralized execution with shared parameters: every agent acts from its
/// own observation and recurrent state through the same QNetParams.
class GreedyPolicy {
 public:
  GreedyPolicy(const QNetParams& params, int n_agents, double epsilon, std::uint64_t rng_seed)
      : params_(&params), n_agents_(n_agents), epsilon_(epsilon), rng_(rng_seed) {
    reset();
  }

  void reset() { hidden_.assign(n_agents_, params_->initial_hidden()); }

  void set_epsilon(double eps) { epsilon_ = eps; }

  std::vector<ActionPair> act(const std::vector<Observation>& obs) {
    std::vector<ActionPair> actions;
    actions.reserve(obs.size());
    for (int i = 0; i < n_agents_; ++i) {
      const QNetTrace t = forward_q(*params_, obs[i], hidden_[i]);
      hidden_[i] = t.h_next;
      actions.push_back(ActionPair::from_index(select_action(t.q, epsilon_, rng_)));
    }
    return actions;
  }

  const std::vector<Eigen::VectorXd>& hidden() const { return hidden_; }

 private:
  const QNetParams* params_;
  int n_agents_;
  double epsilon_;
  Rng rng_;
  std::vector<Eigen::VectorXd> hidden_;
};

inline TrainResult train(const EnvConfig& env_config, const TrainConfig& tc) {
  const QNetConfig qcfg = QNetConfig::for_variant(env_config.variant, tc.hidden_dim);
  TrainResult result;
  result.params = QNetParams::random_init(qcfg, Rng::derive_seed(tc.seed, 1));
  if (tc.total_steps <= 0) return result;

  QNetParams target = result.params;
  ReplayBuffer buffer(tc.buffer_capacity);
  Rng act_rng(Rng::derive_seed(tc.seed, 2));
  Rng batch_rng(Rng::derive_seed(tc.seed, 3));

  Env env(env_config);
  int episode = 0;
  std::vector<Observation> obs = env.reset(Rng::derive_seed(env_config.seed, episode));
  std::vector<Eigen::VectorXd> hidden(env_config.n_agents, result.params.initial_hidden());
  double ep_return = 0.0;
  int ep_steps = 0;
  double ep_loss_sum = 0.0;
  long ep_loss_count = 0;

  for (long step = 1; step <= tc.total_steps; ++step) {
    const double eps = tc.epsilon_at(step);
    std::vector<ActionPair> actions;
    std::vector<QNetTrace> traces;
    actions.reserve(env_config.n_agents);
    traces.reserve(env_config.n_agents);
    for (int i = 0; i < env_config.n_agents; ++i) {
      traces.push_back(forward_q(result.params, obs[i], hidden[i]));
      actions.push_back(ActionPair::from_index(select_action(traces[i].q, eps, act_rng)));
    }
    const StepResult sr = env.step(actions);
    for (int i = 0; i < env_config.n_agents; ++i) {
      buffer.push(Transition{obs[i], actions[i].index(), sr.reward, sr.obs[i], sr.done,
                             hidden[i], traces[i].h_next});
      hidden[i] = traces[i].h_next;
    }
    obs = sr.obs;
    ep_return += sr.reward;
    ep_steps += 1;

    if (static_cast<long>(buffer.size()) >= tc.warmup_transitions) {
      const auto batch = buffer.sample_indices(tc.batch_size, batch_rng);
      const double loss = td_update(result.params, target, buffer, batch, tc.discount,
                                    tc.learning_rate, tc.grad_clip_norm);
      ep_loss_sum += loss;
      ep_loss_count += 1;
      result.updates += 1;
      if (result.updates % tc.target_sync_interval == 0) target = result.params;
    }

    if (sr.done) {
      EpisodeRecord rec;
      rec.episode = episode;
      rec.end_step = step;
      rec.steps = ep_steps;
      rec.episode_return = ep_return;
      rec.safety_activations = env.episode_activations();
      rec.epsilon = eps;
      rec.mean_loss = ep_loss_count > 0 ? ep_loss_sum / ep_loss_count : 0.0;
      result.curve.push_back(rec);
      episode += 1;
      obs = env.reset(Rng::derive_seed(env_config.seed, episode));
      hidden.assign(env_config.n_agents, result.params.initial_hidden());
      ep_return = 0.0;
      ep_steps = 0;
      ep_loss_sum = 0.0;
      ep_loss_count = 0;
    }
  }
  result.env_steps = tc.total_steps;
  return result;
}

struct EvalEpisode {
  int episode = 0;
  std::uint64_t seed = 0;
  int steps = 0;
  double episode_return = 0.0;
  double coverage_pct = 0.0;
  long safety_activations = 0;
};

struct EvalSummary {
  std::vector<EvalEpisode> episodes;

  double mean(const std::function<double(const EvalEpisode&)>& f) const {
    double acc = 0.0;
    for (const auto& e : episodes) acc += f(e);
    return episodes.empty() ? 0.0 : acc / static_cast<double>(episodes.size());
  }
  double stddev(const std::function<double(const EvalEpisode&)>& f) const {
    if (episodes.size() < 2) return 0.0;
    const double mu = mean(f);
    double acc = 0.0;
    for (const auto& e : episodes) acc += (f(e) - mu) * (f(e) - mu);
    return std::sqrt(acc / static_cast<double>(episodes.size() - 1));
  }
  double mean_return() const {
    return mean([](const EvalEpisode& e) { return e.episode_return; });
  }
  double mean_coverage() const {
    return mean([](const EvalEpisode& e) { return e.coverage_pct; });
  }
  double mean_activations() const {
    return mean([](const EvalEpisode& e) { return static_cast<double>(e.safety_activations); });
  }
};

/// Runs n_episodes with per-episode seeds seed_base+k. `policy` must expose
/// reset() and act(obs); `step_hook`, when set, observes every transition
/// (used for trajectory logging).
template <class Policy>
EvalSummary run_episodes(const EnvConfig& env_config, Policy& policy, int n_episodes,
                         std::uint64_t seed_base,
                         const std::function<void(const Env&, std::uint64_t,
                                                  const std::vector<ActionPair>&,
                                                  const StepResult&)>& step_hook = {}) {
  Env env(env_config);
  EvalSummary summary;
  for (int ep = 0; ep < n_episodes; ++ep) {
    const std::uint64_t seed = seed_base + static_cast<std::uint64_t>(ep);
    std::vector<Observation> obs = env.reset(seed);
    policy.reset();
    EvalEpisode rec;
    rec.episode = ep;
    rec.seed = seed;
    int path_steps = 0;
    bool done = false;
    while (!done) {
      const auto actions = policy.act(obs);
      const StepResult sr = env.step(actions);
      if (step_hook) step_hook(env, seed, actions, sr);
      rec.episode_return += sr.reward;
      rec.steps += 1;
      if (sr.breakdown.path_bonus > 0.0) path_steps += 1;
      obs = sr.obs;
      done = sr.done;
    }
    rec.coverage_pct = rec.steps > 0 ? 100.0 * path_steps / rec.steps : 0.0;
    rec.safety_activations = env.episode_activations();
    summary.episodes.push_back(rec);
  }
  return summary;
}

/// Evaluation protocol: greedy (epsilon = 0) decentralized execution with the
/// safety filter forced on regardless of the training variant.
inline EvalSummary evaluate(const QNetParams& params, EnvConfig env_config, int n_episodes,
                            std::uint64_t seed_base,
                            const std::function<void(const Env&, std::uint64_t,
                                                     const std::vector<ActionPair>&,
                                                     const StepResult&)>& step_hook = {}) {
  env_config.filter_override = true;
  GreedyPolicy policy(params, env_config.n_agents, 0.0, Rng::derive_seed(seed_base, 77));
  return run_episodes(env_config, policy, n_episodes, seed_base, step_hook);
}

/// Uniform-random joint actions; the frozen reference policy.
class RandomPolicy {
 public:
  RandomPolicy(int n_agents, std::uint64_t seed) : n_agents_(n_agents), rng_(seed) {}
  void reset() {}
  std::vector<ActionPair> act(const std::vector<Observation>&) {
    std::vector<ActionPair> actions;
    for (int i = 0; i < n_agents_; ++i) {
      actions.push_back(ActionPair::from_index(rng_.uniform_int(0, ActionPair::kCount - 1)));
    }
    return actions;
  }

 private:
  int n_agents_;
  Rng rng_;
};

}  // namespace netbridge
