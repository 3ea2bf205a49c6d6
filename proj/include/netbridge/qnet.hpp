#pragma once

#include <Eigen/Core>
#include <cmath>
#include <string>
#include <vector>

#include "netbridge/env.hpp"
#include "netbridge/errors.hpp"
#include "netbridge/rng.hpp"

namespace netbridge {

struct QNetConfig {
  int node_dim = 9;
  int edge_dim = 4;
  int hidden = 32;
  int actions = ActionPair::kCount;

  static QNetConfig for_variant(Variant v, int hidden = 32) {
    return QNetConfig{node_feature_dim(v), edge_feature_dim(v), hidden, ActionPair::kCount};
  }

  friend bool operator==(const QNetConfig&, const QNetConfig&) = default;
};

/// Action-value network over the local one-hop view. A two-layer tanh
/// encoder embeds each node; neighbor embeddings are pooled with
/// edge-conditioned attention (one linear scoring layer over
/// [ego, neighbor, edge features]); a combiner mixes ego and pooled message;
/// a minimal gated unit keeps a per-agent hidden state across steps; a
/// linear head emits the 9 action values. Biases are stored as k x 1
/// matrices so every parameter can be visited uniformly.
struct QNetParams {
  QNetConfig cfg;
  Eigen::MatrixXd enc_w1, enc_b1;
  Eigen::MatrixXd enc_w2, enc_b2;
  Eigen::MatrixXd att_w, att_b;
  Eigen::MatrixXd comb_w, comb_b;
  Eigen::MatrixXd gate_w, gate_b;
  Eigen::MatrixXd cand_w, cand_b;
  Eigen::MatrixXd q_w, q_b;

  static QNetParams zeros(const QNetConfig& cfg) {
    QNetParams p;
    p.cfg = cfg;
    const int h = cfg.hidden;
    p.enc_w1 = Eigen::MatrixXd::Zero(h, cfg.node_dim);
    p.enc_b1 = Eigen::MatrixXd::Zero(h, 1);
    p.enc_w2 = Eigen::MatrixXd::Zero(h, h);
    p.enc_b2 = Eigen::MatrixXd::Zero(h, 1);
    p.att_w = Eigen::MatrixXd::Zero(2 * h + cfg.edge_dim, 1);
    p.att_b = Eigen::MatrixXd::Zero(1, 1);
    p.comb_w = Eigen::MatrixXd::Zero(h, 2 * h);
    p.comb_b = Eigen::MatrixXd::Zero(h, 1);
    p.gate_w = Eigen::MatrixXd::Zero(h, 2 * h);
    p.gate_b = Eigen::MatrixXd::Zero(h, 1);
    p.cand_w = Eigen::MatrixXd::Zero(h, 2 * h);
    p.cand_b = Eigen::MatrixXd::Zero(h, 1);
    p.q_w = Eigen::MatrixXd::Zero(cfg.actions, h);
    p.q_b = Eigen::MatrixXd::Zero(cfg.actions, 1);
    return p;
  }

  /// Seeded uniform init, scale sqrt(6 / (fan_in + fan_out)); biases zero.
  static QNetParams random_init(const QNetConfig& cfg, std::uint64_t seed) {
    QNetParams p = zeros(cfg);
    Rng rng(seed);
    auto fill = [&rng](Eigen::MatrixXd& w, int fan_in, int fan_out) {
      const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
      for (Eigen::Index j = 0; j < w.cols(); ++j) {
        for (Eigen::Index i = 0; i < w.rows(); ++i) {
          w(i, j) = rng.uniform(-a, a);
        }
      }
    };
    const int h = cfg.hidden;
    fill(p.enc_w1, cfg.node_dim, h);
    fill(p.enc_w2, h, h);
    fill(p.att_w, 2 * h + cfg.edge_dim, 1);
    fill(p.comb_w, 2 * h, h);
    fill(p.gate_w, 2 * h, h);
    fill(p.cand_w, 2 * h, h);
    fill(p.q_w, h, cfg.actions);
    return p;
  }

  std::vector<Eigen::MatrixXd*> tensors() {
    return {&enc_w1, &enc_b1, &enc_w2, &enc_b2, &att_w, &att_b, &comb_w, &comb_b,
            &gate_w, &gate_b, &cand_w, &cand_b, &q_w,   &q_b};
  }
  std::vector<const Eigen::MatrixXd*> tensors() const {
    return {&enc_w1, &enc_b1, &enc_w2, &enc_b2, &att_w, &att_b, &comb_w, &comb_b,
            &gate_w, &gate_b, &cand_w, &cand_b, &q_w,   &q_b};
  }
  static const std::vector<std::string>& tensor_names() {
    static const std::vector<std::string> names = {
        "enc_w1", "enc_b1", "enc_w2", "enc_b2", "att_w", "att_b", "comb_w",
        "comb_b", "gate_w", "gate_b", "cand_w", "cand_b", "q_w",  "q_b"};
    return names;
  }

  Eigen::VectorXd initial_hidden() const { return Eigen::VectorXd::Zero(cfg.hidden); }
};

namespace detail {

inline Eigen::VectorXd tanh_v(const Eigen::VectorXd& x) { return x.array().tanh(); }

inline Eigen::VectorXd sigmoid_v(const Eigen::VectorXd& x) {
  return 1.0 / (1.0 + (-x.array()).exp());
}

}  // namespace detail

/// Intermediate values of one forward pass, kept for backprop.
struct QNetTrace {
  Eigen::VectorXd ego_in, ego_t, ego_z;
  std::vector<Eigen::VectorXd> nb_in, nb_t, nb_z, nb_edge;
  Eigen::VectorXd scores, alpha;
  Eigen::VectorXd m, comb_in, u;
  Eigen::VectorXd h_prev, gate_in, g, r, cand_in, hc, h_next;
  Eigen::VectorXd q;
};

inline void check_observation_shape(const QNetConfig& cfg, const Observation& obs) {
  if (obs.ego.size() != cfg.node_dim) {
    throw ShapeMismatch("forward_q: ego feature dim " + std::to_string(obs.ego.size()) +
                        " vs configured " + std::to_string(cfg.node_dim));
  }
  for (const auto& nb : obs.neighbors) {
    if (nb.node.size() != cfg.node_dim || nb.edge.size() != cfg.edge_dim) {
      throw ShapeMismatch("forward_q: neighbor feature dims vs configured dims");
    }
  }
}

inline QNetTrace forward_q(const QNetParams& p, const Observation& obs,
                           const Eigen::VectorXd& h_prev) {
  check_observation_shape(p.cfg, obs);
  if (h_prev.size() != p.cfg.hidden) {
    throw ShapeMismatch("forward_q: recurrent state dim");
  }
  const int h = p.cfg.hidden;
  QNetTrace t;
  t.ego_in = obs.ego;
  t.ego_t = detail::tanh_v(p.enc_w1 * obs.ego + p.enc_b1.col(0));
  t.ego_z = detail::tanh_v(p.enc_w2 * t.ego_t + p.enc_b2.col(0));

  const int k = static_cast<int>(obs.neighbors.size());
  t.m = Eigen::VectorXd::Zero(h);
  if (k > 0) {
    t.scores.resize(k);
    for (int j = 0; j < k; ++j) {
      const auto& nb = obs.neighbors[j];
      t.nb_in.push_back(nb.node);
      t.nb_edge.push_back(nb.edge);
      t.nb_t.push_back(detail::tanh_v(p.enc_w1 * nb.node + p.enc_b1.col(0)));
      t.nb_z.push_back(detail::tanh_v(p.enc_w2 * t.nb_t[j] + p.enc_b2.col(0)));
      Eigen::VectorXd att_in(2 * h + p.cfg.edge_dim);
      att_in << t.ego_z, t.nb_z[j], nb.edge;
      t.scores[j] = p.att_w.col(0).dot(att_in) + p.att_b(0, 0);
    }
    const Eigen::ArrayXd shifted = t.scores.array() - t.scores.maxCoeff();
    const Eigen::ArrayXd ex = shifted.exp();
    t.alpha = (ex / ex.sum()).matrix();
    for (int j = 0; j < k; ++j) t.m += t.alpha[j] * t.nb_z[j];
  }

  t.comb_in.resize(2 * h);
  t.comb_in << t.ego_z, t.m;
  t.u = detail::tanh_v(p.comb_w * t.comb_in + p.comb_b.col(0));

  t.h_prev = h_prev;
  t.gate_in.resize(2 * h);
  t.gate_in << t.u, h_prev;
  t.g = detail::sigmoid_v(p.gate_w * t.gate_in + p.gate_b.col(0));
  t.r = t.g.cwiseProduct(h_prev);
  t.cand_in.resize(2 * h);
  t.cand_in << t.u, t.r;
  t.hc = detail::tanh_v(p.cand_w * t.cand_in + p.cand_b.col(0));
  t.h_next = (Eigen::VectorXd::Ones(h) - t.g).cwiseProduct(h_prev) + t.g.cwiseProduct(t.hc);

  t.q = p.q_w * t.h_next + p.q_b.col(0);
  return t;
}

/// Accumulates dLoss/dParams into `grads` for one sample, given dLoss/dq.
/// No backprop through time: the stored recurrent state is treated as input.
inline void backward_q(const QNetParams& p, const QNetTrace& t, const Eigen::VectorXd& dq,
                       QNetParams& grads) {
  const int h = p.cfg.hidden;
  grads.q_w += dq * t.h_next.transpose();
  grads.q_b.col(0) += dq;
  Eigen::VectorXd dh_next = p.q_w.transpose() * dq;

  Eigen::VectorXd dg = dh_next.cwiseProduct(t.hc - t.h_prev);
  const Eigen::VectorXd dhc = dh_next.cwiseProduct(t.g);

  const Eigen::VectorXd dcand_a = dhc.cwiseProduct(
      (Eigen::VectorXd::Ones(h) - t.hc.cwiseProduct(t.hc)));
  grads.cand_w += dcand_a * t.cand_in.transpose();
  grads.cand_b.col(0) += dcand_a;
  const Eigen::VectorXd dcand_in = p.cand_w.transpose() * dcand_a;
  Eigen::VectorXd du = dcand_in.head(h);
  const Eigen::VectorXd dr = dcand_in.tail(h);
  dg += dr.cwiseProduct(t.h_prev);

  const Eigen::VectorXd dgate_a =
      dg.cwiseProduct(t.g).cwiseProduct(Eigen::VectorXd::Ones(h) - t.g);
  grads.gate_w += dgate_a * t.gate_in.transpose();
  grads.gate_b.col(0) += dgate_a;
  du += (p.gate_w.transpose() * dgate_a).head(h);

  const Eigen::VectorXd du_a =
      du.cwiseProduct(Eigen::VectorXd::Ones(h) - t.u.cwiseProduct(t.u));
  grads.comb_w += du_a * t.comb_in.transpose();
  grads.comb_b.col(0) += du_a;
  const Eigen::VectorXd dcomb_in = p.comb_w.transpose() * du_a;
  Eigen::VectorXd dz_e = dcomb_in.head(h);
  const Eigen::VectorXd dm = dcomb_in.tail(h);

  const int k = static_cast<int>(t.nb_z.size());
  std::vector<Eigen::VectorXd> dz_nb(k, Eigen::VectorXd::Zero(h));
  if (k > 0) {
    Eigen::VectorXd dalpha(k);
    for (int j = 0; j < k; ++j) {
      dalpha[j] = t.nb_z[j].dot(dm);
      dz_nb[j] += t.alpha[j] * dm;
    }
    const double mix = t.alpha.dot(dalpha);
    for (int j = 0; j < k; ++j) {
      const double ds = t.alpha[j] * (dalpha[j] - mix);
      grads.att_b(0, 0) += ds;
      Eigen::VectorXd att_in(2 * h + p.cfg.edge_dim);
      att_in << t.ego_z, t.nb_z[j], t.nb_edge[j];
      grads.att_w.col(0) += ds * att_in;
      dz_e += ds * p.att_w.col(0).head(h);
      dz_nb[j] += ds * p.att_w.col(0).segment(h, h);
    }
  }

  auto encoder_backward = [&](const Eigen::VectorXd& f_in, const Eigen::VectorXd& t1,
                              const Eigen::VectorXd& z, const Eigen::VectorXd& dz) {
    const Eigen::VectorXd da2 = dz.cwiseProduct(Eigen::VectorXd::Ones(h) - z.cwiseProduct(z));
    grads.enc_w2 += da2 * t1.transpose();
    grads.enc_b2.col(0) += da2;
    const Eigen::VectorXd dt1 = p.enc_w2.transpose() * da2;
    const Eigen::VectorXd da1 = dt1.cwiseProduct(Eigen::VectorXd::Ones(h) - t1.cwiseProduct(t1));
    grads.enc_w1 += da1 * f_in.transpose();
    grads.enc_b1.col(0) += da1;
  };
  encoder_backward(t.ego_in, t.ego_t, t.ego_z, dz_e);
  for (int j = 0; j < k; ++j) {
    encoder_backward(t.nb_in[j], t.nb_t[j], t.nb_z[j], dz_nb[j]);
  }
}

/// Greedy action with lowest-index tie-break; with probability epsilon a
/// uniform action instead.
inline int select_action(const Eigen::VectorXd& q_values, double epsilon, Rng& rng) {
  if (epsilon > 0.0 && rng.uniform() < epsilon) {
    return rng.uniform_int(0, static_cast<int>(q_values.size()) - 1);
  }
  int best = 0;
  for (int i = 1; i < q_values.size(); ++i) {
    if (q_values[i] > q_values[best]) best = i;
  }
  return best;
}

}  // namespace netbridge
