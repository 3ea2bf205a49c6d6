#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "netbridge/errors.hpp"

namespace netbridge {

enum class EntityKind : std::uint8_t { Agent, Target };

struct EntityId {
  EntityKind kind;
  int index;

  friend bool operator==(const EntityId&, const EntityId&) = default;
  friend auto operator<=>(const EntityId&, const EntityId&) = default;
};

inline EntityId agent_id(int index) { return {EntityKind::Agent, index}; }
inline EntityId target_id(int index) { return {EntityKind::Target, index}; }

inline std::string to_string(const EntityId& id) {
  return (id.kind == EntityKind::Agent ? "A" : "T") + std::to_string(id.index);
}

/// Snapshot of the communication graph at one time-step. Nodes are agents and
/// targets; an edge exists iff the Euclidean distance is <= comm_range
/// (closed threshold). Immutable once built; rebuild per step.
class CommGraph {
 public:
  CommGraph(std::vector<std::pair<EntityId, Eigen::Vector2d>> positions, double comm_range)
      : comm_range_(comm_range) {
    std::sort(positions.begin(), positions.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    ids_.reserve(positions.size());
    pos_.reserve(positions.size());
    for (auto& [id, p] : positions) {
      if (!ids_.empty() && ids_.back() == id) {
        throw Error("CommGraph: duplicate entity " + to_string(id));
      }
      ids_.push_back(id);
      pos_.push_back(p);
    }
    const int n = static_cast<int>(ids_.size());
    adj_.assign(n, {});
    for (int u = 0; u < n; ++u) {
      for (int v = u + 1; v < n; ++v) {
        if ((pos_[u] - pos_[v]).norm() <= comm_range_) {
          adj_[u].push_back(v);
          adj_[v].push_back(u);
        }
      }
    }
  }

  double comm_range() const { return comm_range_; }

  /// Radius of the per-entity communication ball; two balls of this radius
  /// intersect exactly when the edge threshold comm_range is met.
  double ball_radius() const { return comm_range_ / 2.0; }

  int node_count() const { return static_cast<int>(ids_.size()); }
  const std::vector<EntityId>& ids() const { return ids_; }

  bool has(const EntityId& id) const { return find(id) >= 0; }

  const Eigen::Vector2d& position(const EntityId& id) const { return pos_[index_of(id)]; }

  /// All entities adjacent to id, in deterministic (kind, index) order.
  std::vector<EntityId> one_hop(const EntityId& id) const {
    std::vector<EntityId> out;
    for (int v : adj_[index_of(id)]) out.push_back(ids_[v]);
    return out;
  }

  /// Agents adjacent to id: the set D_i(t) consumed by the safety filter.
  std::vector<int> one_hop_agents(const EntityId& id) const {
    std::vector<int> out;
    for (int v : adj_[index_of(id)]) {
      if (ids_[v].kind == EntityKind::Agent) out.push_back(ids_[v].index);
    }
    return out;
  }

  bool adjacent(const EntityId& a, const EntityId& b) const {
    const int ua = index_of(a);
    const int vb = index_of(b);
    return std::find(adj_[ua].begin(), adj_[ua].end(), vb) != adj_[ua].end();
  }

  int largest_component_size() const {
    const int n = node_count();
    std::vector<int> comp(n, -1);
    int best = 0;
    std::vector<int> stack;
    for (int start = 0; start < n; ++start) {
      if (comp[start] >= 0) continue;
      int size = 0;
      stack.push_back(start);
      comp[start] = start;
      while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        ++size;
        for (int v : adj_[u]) {
          if (comp[v] < 0) {
            comp[v] = start;
            stack.push_back(v);
          }
        }
      }
      best = std::max(best, size);
    }
    return best;
  }

  bool path_exists(const EntityId& from, const EntityId& to) const {
    const int src = index_of(from);
    const int dst = index_of(to);
    if (src == dst) return true;
    std::vector<char> seen(node_count(), 0);
    std::vector<int> stack{src};
    seen[src] = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v : adj_[u]) {
        if (v == dst) return true;
        if (!seen[v]) {
          seen[v] = 1;
          stack.push_back(v);
        }
      }
    }
    return false;
  }

  /// Edges as sorted id pairs (u < v), for logging.
  std::vector<std::pair<EntityId, EntityId>> edges() const {
    std::vector<std::pair<EntityId, EntityId>> out;
    for (int u = 0; u < node_count(); ++u) {
      for (int v : adj_[u]) {
        if (u < v) out.emplace_back(ids_[u], ids_[v]);
      }
    }
    return out;
  }

 private:
  int find(const EntityId& id) const {
    const auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
    if (it == ids_.end() || *it != id) return -1;
    return static_cast<int>(it - ids_.begin());
  }

  int index_of(const EntityId& id) const {
    const int i = find(id);
    if (i < 0) throw UnknownEntity("CommGraph: unknown entity " + to_string(id));
    return i;
  }

  double comm_range_;
  std::vector<EntityId> ids_;
  std::vector<Eigen::Vector2d> pos_;
  std::vector<std::vector<int>> adj_;
};

inline CommGraph build_graph(std::vector<std::pair<EntityId, Eigen::Vector2d>> positions,
                             double comm_range) {
  return CommGraph(std::move(positions), comm_range);
}

}  // namespace netbridge
