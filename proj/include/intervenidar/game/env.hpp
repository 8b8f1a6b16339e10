#pragma once

#include <cstdint>
#include <deque>
#include <string>

#include "intervenidar/game/game.hpp"
#include "intervenidar/render/render.hpp"

namespace intervenidar::game {

// What an agent may look at when choosing an action. In-process agents get
// both views; wire agents get whichever one they negotiated.
class ObservationSource {
 public:
  virtual ~ObservationSource() = default;
  virtual const GameState& latent() const = 0;
  virtual render::Observation pixels() const = 0;
};

// The Intervenidar game as an mdp::Environment. Keeps the last four states so
// observations can be stacked.
class IntervenidarEnv final : public ObservationSource {
 public:
  explicit IntervenidarEnv(ConfigPtr config, render::RenderConfig render_config = {});

  std::string env_id() const { return "intervenidar"; }
  std::string config_hash() const { return config_->hash(); }
  mdp::MdpSpec spec() const { return {kActionCount, 1.0}; }

  // Canonical start state. The game itself is deterministic; the seed is
  // accepted for interface uniformity.
  void reset(std::uint64_t seed = 0);
  // Begin an episode from an arbitrary (e.g. intervened or mid-game) state.
  void set_start_state(GameState state);

  mdp::StepResult<mdp::Digest> step(int action);

  mdp::Digest digest() const { return latent_digest(state()); }
  bool terminal() const { return state().terminal; }
  double cumulative_reward() const { return cumulative_reward_; }

  const GameState& state() const { return history_.back(); }
  const std::deque<GameState>& history() const { return history_; }
  const ConfigPtr& config() const { return config_; }
  const render::RenderConfig& render_config() const { return render_config_; }

  const GameState& latent() const override { return state(); }
  render::Observation pixels() const override;

 private:
  ConfigPtr config_;
  render::RenderConfig render_config_;
  std::deque<GameState> history_;
  double cumulative_reward_ = 0.0;
};

}  // namespace intervenidar::game
