#include "intervenidar/game/env.hpp"

#include <vector>

namespace intervenidar::game {

IntervenidarEnv::IntervenidarEnv(ConfigPtr config, render::RenderConfig render_config)
    : config_(std::move(config)), render_config_(render_config) {
  reset();
}

void IntervenidarEnv::reset(std::uint64_t) { set_start_state(new_game(config_)); }

void IntervenidarEnv::set_start_state(GameState state) {
  if (state.config->hash() != config_->hash()) {
    throw ConfigMismatchError("start state belongs to a different config");
  }
  history_.clear();
  history_.push_back(std::move(state));
  cumulative_reward_ = 0.0;
}

mdp::StepResult<mdp::Digest> IntervenidarEnv::step(int action) {
  if (action < 0 || action >= kActionCount) throw GameError("invalid action " + std::to_string(action));
  GameState next = history_.back();
  const double reward = step_in_place(next, static_cast<Action>(action));
  cumulative_reward_ += reward;
  history_.push_back(std::move(next));
  while (history_.size() > static_cast<std::size_t>(render::kStackDepth)) history_.pop_front();
  return {digest(), reward, terminal()};
}

render::Observation IntervenidarEnv::pixels() const {
  std::vector<GameState> states(history_.begin(), history_.end());
  return render::observe(states, render_config_);
}

}  // namespace intervenidar::game
