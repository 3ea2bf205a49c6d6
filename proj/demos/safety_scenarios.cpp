// Runs the scripted adversarial scenarios and prints a per-scenario summary:
// a minimal tour of the env + safety filter API.

#include <iostream>

#include "netbridge/verify.hpp"

int main() {
  using namespace netbridge;
  for (const auto& spec : adversarial_scenarios()) {
    const ScenarioResult r = run_scenario(spec, /*episode_len=*/200);
    std::cout << r.name << ": " << r.steps << " steps, " << r.activations
              << " filter activations, " << r.intersection_violations
              << " setpoint intersections, " << r.collision_events << " collisions, "
              << r.deadlocked_agent_steps << " deadlocked agent-steps\n";
  }
  return 0;
}
