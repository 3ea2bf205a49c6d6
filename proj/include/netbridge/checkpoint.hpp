#pragma once

#include <fstream>
#include <string>

#include "netbridge/errors.hpp"
#include "netbridge/qnet.hpp"
#include "netbridge/run_config.hpp"
#include "netbridge/version.hpp"

namespace netbridge {

struct Checkpoint {
  QNetParams params;
  EnvConfig env;
  TrainConfig train;
  std::string fingerprint;
};

inline void save_checkpoint(const std::string& path, const QNetParams& params,
                            const EnvConfig& env, const TrainConfig& train) {
  Json j;
  j["format"] = "netbridge-checkpoint";
  j["version"] = kCheckpointFormatVersion;
  j["lib_version"] = kVersion;
  j["config_fingerprint"] = config_fingerprint(env, train.hidden_dim);
  j["env"] = env_config_to_json(env);
  j["train"] = train_config_to_json(train);
  j["qnet"] = {{"node_dim", params.cfg.node_dim},
               {"edge_dim", params.cfg.edge_dim},
               {"hidden", params.cfg.hidden},
               {"actions", params.cfg.actions}};
  Json tensors;
  const auto names = QNetParams::tensor_names();
  const auto ts = params.tensors();
  for (std::size_t i = 0; i < ts.size(); ++i) {
    Json t;
    t["rows"] = ts[i]->rows();
    t["cols"] = ts[i]->cols();
    Json data = Json::array();
    for (Eigen::Index r = 0; r < ts[i]->rows(); ++r) {
      for (Eigen::Index c = 0; c < ts[i]->cols(); ++c) data.push_back((*ts[i])(r, c));
    }
    t["data"] = std::move(data);  // row-major
    tensors[names[i]] = std::move(t);
  }
  j["tensors"] = std::move(tensors);

  std::ofstream out(path);
  if (!out) throw Error("cannot write checkpoint: " + path);
  out << j.dump(1) << "\n";
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open checkpoint: " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw ConfigError("checkpoint parse error in " + path + ": " + e.what());
  }
  if (j.value("format", "") != "netbridge-checkpoint") {
    throw ConfigError("not a checkpoint file: " + path);
  }
  if (j.value("version", -1) != kCheckpointFormatVersion) {
    throw VersionMismatch("checkpoint version " + std::to_string(j.value("version", -1)) +
                          " != " + std::to_string(kCheckpointFormatVersion));
  }
  Checkpoint cp;
  cp.env = env_config_from_json(j.at("env"));
  cp.train = train_config_from_json(j.at("train"));
  cp.fingerprint = j.value("config_fingerprint", "");

  const Json& q = j.at("qnet");
  QNetConfig cfg{q.at("node_dim").get<int>(), q.at("edge_dim").get<int>(),
                 q.at("hidden").get<int>(), q.at("actions").get<int>()};
  cp.params = QNetParams::zeros(cfg);
  const auto names = QNetParams::tensor_names();
  auto ts = cp.params.tensors();
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const Json& t = j.at("tensors").at(names[i]);
    const Eigen::Index rows = t.at("rows").get<Eigen::Index>();
    const Eigen::Index cols = t.at("cols").get<Eigen::Index>();
    if (rows != ts[i]->rows() || cols != ts[i]->cols()) {
      throw ShapeMismatch("checkpoint tensor " + names[i] + " has shape " + std::to_string(rows) +
                          "x" + std::to_string(cols) + ", expected " +
                          std::to_string(ts[i]->rows()) + "x" + std::to_string(ts[i]->cols()));
    }
    const Json& data = t.at("data");
    if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
      throw ShapeMismatch("checkpoint tensor " + names[i] + ": data length mismatch");
    }
    Eigen::Index k = 0;
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) (*ts[i])(r, c) = data[k++].get<double>();
    }
  }
  return cp;
}

}  // namespace netbridge
