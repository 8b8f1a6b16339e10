#pragma once

#include <optional>

#include "intervenidar/bridge/agent.hpp"
#include "intervenidar/mdp/rng.hpp"

namespace intervenidar::bridge {

// Uniform over the five actions, drawn from the seed's "agent" stream.
class UniformRandomAgent final : public Agent {
 public:
  std::string id() const override { return "random"; }
  Capabilities capabilities() const override { return {}; }
  void begin_episode(std::uint64_t seed) override { rng_ = mdp::Rng::derived(seed, "agent"); }
  mdp::PolicyResponse act(const game::ObservationSource& view) override;

 private:
  mdp::Rng rng_{0};
};

// Always the no-move action.
class StationaryAgent final : public Agent {
 public:
  std::string id() const override { return "stationary"; }
  Capabilities capabilities() const override { return {}; }
  void begin_episode(std::uint64_t) override {}
  mdp::PolicyResponse act(const game::ObservationSource&) override { return {0, {}, {}, {}}; }
};

struct GreedyPainterOptions {
  // Steps of enemy motion simulated ahead; a move is only taken if the
  // player can survive that long afterwards.
  int horizon = 24;
  // Probability of taking a uniformly random survivable action instead of
  // the greedy one; 0 makes the agent fully deterministic.
  double wander = 0.0;
  std::string id = "greedy-painter";
};

// Heads for the earliest-reachable unpainted tile of an unfilled segment
// along a route that provably survives the planning horizon (enemy motion is
// independent of the player, so it is simulated exactly). When nothing is
// paintable in time it closes track distance along survivable moves; when no
// move survives it maximises distance to the nearest enemy.
class GreedyPainterAgent final : public Agent {
 public:
  explicit GreedyPainterAgent(GreedyPainterOptions options = {}) : options_(std::move(options)) {}
  std::string id() const override { return options_.id; }
  Capabilities capabilities() const override { return {}; }
  void begin_episode(std::uint64_t seed) override { rng_ = mdp::Rng::derived(seed, "agent"); }
  mdp::PolicyResponse act(const game::ObservationSource& view) override;

  // Exposed for tests: the greedy choice for a state, ignoring `wander`.
  game::Action choose(const game::GameState& state) const;

 private:
  GreedyPainterOptions options_;
  mdp::Rng rng_{0};
};

}  // namespace intervenidar::bridge
