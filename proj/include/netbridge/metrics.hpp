#pragma once

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "netbridge/errors.hpp"
#include "netbridge/learner.hpp"
#include "netbridge/run_config.hpp"

namespace netbridge {

/// One line of the metrics log. `wall_clock_ms` is measurement, not
/// simulation output: determinism comparisons hash everything except it.
struct MetricsRecord {
  std::string run_id;
  std::string variant;
  std::string kind;  // "train_episode" or "eval_episode"
  int episode = 0;
  double coverage_pct = 0.0;
  long safety_activations = 0;
  double episode_return = 0.0;
  double wall_clock_ms = 0.0;
};

inline Json to_json(const MetricsRecord& r) {
  Json j;
  j["run_id"] = r.run_id;
  j["variant"] = r.variant;
  j["kind"] = r.kind;
  j["episode"] = r.episode;
  j["coverage_pct"] = r.coverage_pct;
  j["safety_activations"] = r.safety_activations;
  j["episode_return"] = r.episode_return;
  j["wall_clock_ms"] = r.wall_clock_ms;
  return j;
}

class MetricsWriter {
 public:
  explicit MetricsWriter(const std::string& path) : out_(path) {
    if (!out_) throw Error("cannot open metrics log for writing: " + path);
  }

  void write(const MetricsRecord& r) { out_ << to_json(r).dump() << "\n"; }
  void flush() { out_.flush(); }

 private:
  std::ofstream out_;
};

/// FNV-1a digest of a metrics log with wall-clock stripped from each record.
inline std::string metrics_content_digest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open metrics log: " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::exception& e) {
      throw Error("metrics log parse error: " + std::string(e.what()));
    }
    j.erase("wall_clock_ms");
    const std::string canonical = j.dump();
    for (const unsigned char ch : canonical) {
      h ^= ch;
      h *= 0x100000001b3ULL;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

/// Mean +/- standard deviation table over evaluation episodes, one row per
/// summary.
inline std::string format_eval_table(const std::string& variant, const EvalSummary& s) {
  auto cov = [](const EvalEpisode& e) { return e.coverage_pct; };
  auto act = [](const EvalEpisode& e) { return static_cast<double>(e.safety_activations); };
  auto ret = [](const EvalEpisode& e) { return e.episode_return; };
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << "variant    episodes  avg coverage        avg safety interventions  mean return\n";
  os << std::left << std::setw(11) << variant << std::setw(10) << s.episodes.size();
  std::ostringstream c1, c2, c3;
  c1 << std::fixed << std::setprecision(2) << "(" << s.mean(cov) << " +/- " << s.stddev(cov) << ")%";
  c2 << std::fixed << std::setprecision(2) << s.mean(act) << " +/- " << s.stddev(act);
  c3 << std::fixed << std::setprecision(2) << s.mean(ret) << " +/- " << s.stddev(ret);
  os << std::setw(20) << c1.str() << std::setw(26) << c2.str() << c3.str() << "\n";
  return os.str();
}

}  // namespace netbridge
