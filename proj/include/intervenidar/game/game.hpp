#pragma once

#include "intervenidar/game/config.hpp"
#include "intervenidar/game/state.hpp"
#include "intervenidar/mdp/digest.hpp"
#include "intervenidar/mdp/mdp.hpp"

namespace intervenidar::game {

class GameError : public Error {
 public:
  using Error::Error;
};

// Canonical start state: nothing painted, score 0, entities at their
// configured start positions. Identical on every call.
GameState new_game(ConfigPtr config);

// One simulator tick:
//   1. the player moves one tile (no-op if the direction is off track),
//      painting the tile it leaves and the tile it enters;
//   2. every segment whose tiles are now all painted becomes filled, +1 score
//      each;
//   3. if all segments are filled the game ends with `won`;
//   4. otherwise every enemy advances by its protocol, and the game ends with
//      `dead` if an enemy shares the player's tile or the two swapped tiles.
// reward = 1 if the score rose this tick, else 0. Throws GameError when the
// state is already terminal.
mdp::StepResult<GameState> step(GameState state, Action action);

// Same as step() but mutates in place; returns the reward.
double step_in_place(GameState& state, Action action);

// Hash of the canonical latent serialisation: board layout, entities, paint,
// score, step counter and terminal flags. Rendered pixels are not involved.
mdp::Digest latent_digest(const GameState& state);

// Recomputes `filled` from `painted` and returns the segment ids that changed
// from unfilled to filled.
std::vector<int> refresh_filled(GameState& state);

}  // namespace intervenidar::game
