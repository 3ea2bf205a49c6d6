#include <catch2/catch_amalgamated.hpp>

#include "netbridge/comm_graph.hpp"
#include "netbridge/rng.hpp"

using namespace netbridge;

namespace {

std::vector<std::pair<EntityId, Eigen::Vector2d>> random_layout(int n_agents, int n_targets,
                                                                Rng& rng) {
  std::vector<std::pair<EntityId, Eigen::Vector2d>> out;
  for (int i = 0; i < n_agents; ++i) {
    out.emplace_back(agent_id(i), Eigen::Vector2d(rng.uniform(), rng.uniform()));
  }
  for (int k = 0; k < n_targets; ++k) {
    out.emplace_back(target_id(k), Eigen::Vector2d(rng.uniform(), rng.uniform()));
  }
  return out;
}

}  // namespace

TEST_CASE("edge threshold is closed at comm_range") {
  const CommGraph at{{{agent_id(0), {0.0, 0.0}}, {agent_id(1), {0.20, 0.0}}}, 0.20};
  CHECK(at.adjacent(agent_id(0), agent_id(1)));
  const CommGraph beyond{{{agent_id(0), {0.0, 0.0}}, {agent_id(1), {0.201, 0.0}}}, 0.20};
  CHECK_FALSE(beyond.adjacent(agent_id(0), agent_id(1)));
  CHECK(at.ball_radius() == 0.10);
}

TEST_CASE("edge set equals the brute-force pairwise check") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto layout = random_layout(6, 0, rng);
    const CommGraph g(layout, 0.3);
    for (std::size_t i = 0; i < layout.size(); ++i) {
      for (std::size_t j = i + 1; j < layout.size(); ++j) {
        const bool expected = (layout[i].second - layout[j].second).norm() <= 0.3;
        CHECK(g.adjacent(layout[i].first, layout[j].first) == expected);
      }
    }
  }
}

TEST_CASE("one_hop basics") {
  const CommGraph isolated{{{agent_id(0), {0.0, 0.0}}, {agent_id(1), {0.9, 0.9}}}, 0.2};
  CHECK(isolated.one_hop(agent_id(0)).empty());
  CHECK_THROWS_AS(isolated.one_hop(agent_id(7)), UnknownEntity);

  const CommGraph triangle{
      {{agent_id(0), {0.0, 0.0}}, {agent_id(1), {0.1, 0.0}}, {agent_id(2), {0.05, 0.08}}}, 0.2};
  for (int i = 0; i < 3; ++i) {
    const auto nb = triangle.one_hop_agents(agent_id(i));
    CHECK(nb.size() == 2);
  }
}

TEST_CASE("one_hop matches adjacency on random graphs") {
  Rng rng(4);
  const auto layout = random_layout(8, 2, rng);
  const CommGraph g(layout, 0.35);
  for (const auto& [id, _] : layout) {
    for (const EntityId& nb : g.one_hop(id)) {
      CHECK(g.adjacent(id, nb));
    }
    const auto hop = g.one_hop(id);
    std::size_t adjacent_count = 0;
    for (const auto& [other, __] : layout) {
      if (other != id && g.adjacent(id, other)) ++adjacent_count;
    }
    CHECK(hop.size() == adjacent_count);
  }
}

TEST_CASE("largest component sizes") {
  std::vector<std::pair<EntityId, Eigen::Vector2d>> spread;
  for (int i = 0; i < 5; ++i) spread.emplace_back(agent_id(i), Eigen::Vector2d(i * 10.0, 0.0));
  CHECK(CommGraph(spread, 0.2).largest_component_size() == 1);

  std::vector<std::pair<EntityId, Eigen::Vector2d>> tight;
  for (int i = 0; i < 5; ++i) tight.emplace_back(agent_id(i), Eigen::Vector2d(i * 0.01, 0.0));
  CHECK(CommGraph(tight, 0.2).largest_component_size() == 5);

  // two triangles plus an isolated node -> 3
  std::vector<std::pair<EntityId, Eigen::Vector2d>> twin;
  twin.emplace_back(agent_id(0), Eigen::Vector2d(0.0, 0.0));
  twin.emplace_back(agent_id(1), Eigen::Vector2d(0.1, 0.0));
  twin.emplace_back(agent_id(2), Eigen::Vector2d(0.05, 0.08));
  twin.emplace_back(agent_id(3), Eigen::Vector2d(5.0, 0.0));
  twin.emplace_back(agent_id(4), Eigen::Vector2d(5.1, 0.0));
  twin.emplace_back(agent_id(5), Eigen::Vector2d(5.05, 0.08));
  twin.emplace_back(target_id(0), Eigen::Vector2d(9.0, 9.0));
  CHECK(CommGraph(twin, 0.2).largest_component_size() == 3);
}

TEST_CASE("path queries") {
  const CommGraph direct{{{target_id(0), {0.0, 0.0}}, {target_id(1), {0.1, 0.0}}}, 0.2};
  CHECK(direct.path_exists(target_id(0), target_id(1)));

  const CommGraph split{{{target_id(0), {0.0, 0.0}}, {target_id(1), {5.0, 0.0}}}, 0.2};
  CHECK_FALSE(split.path_exists(target_id(0), target_id(1)));

  // chain T0 - A0 - A1 - A2 - T1 with 0.19 gaps
  std::vector<std::pair<EntityId, Eigen::Vector2d>> chain;
  chain.emplace_back(target_id(0), Eigen::Vector2d(0.0, 0.0));
  chain.emplace_back(agent_id(0), Eigen::Vector2d(0.19, 0.0));
  chain.emplace_back(agent_id(1), Eigen::Vector2d(0.38, 0.0));
  chain.emplace_back(agent_id(2), Eigen::Vector2d(0.57, 0.0));
  chain.emplace_back(target_id(1), Eigen::Vector2d(0.76, 0.0));
  const CommGraph g(chain, 0.20);
  CHECK(g.path_exists(target_id(0), target_id(1)));
  CHECK(g.largest_component_size() == 5);
  CHECK_THROWS_AS(g.path_exists(target_id(0), target_id(9)), UnknownEntity);
}

TEST_CASE("rebuild determinism and range monotonicity") {
  Rng rng(9);
  const auto layout = random_layout(7, 2, rng);
  const CommGraph a(layout, 0.25);
  const CommGraph b(layout, 0.25);
  CHECK(a.edges() == b.edges());

  const CommGraph wider(layout, 0.40);
  for (const auto& [u, v] : a.edges()) {
    CHECK(wider.adjacent(u, v));
  }
}
