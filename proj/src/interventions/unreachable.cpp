#include "intervenidar/interventions/interventions.hpp"

#include "intervenidar/game/protocols.hpp"

namespace intervenidar::interventions {

// Each check relies on a property no action can change:
//  - the board layout is fixed for the whole game;
//  - enemy motion ignores the player, so at step t every reachable state has
//    the same enemies as the canonical start advanced t ticks;
//  - a move paints at most one new tile (the one entered), so after t steps
//    at most t + 1 tiles are painted and none at step 0;
//  - the player moves at most one tile per step;
//  - score counts filled segments.
Verdict verify_unreachable(const game::GameState& state, const game::GameConfig& base) {
  if (state.config.get() != &base && state.config->hash() != base.hash()) {
    return {true, "state belongs to a different board configuration"};
  }
  if (!state.board->same_layout(base.board)) return {true, "segment set mutated"};

  if (state.step == 0 && state.painted_count() > 0) return {true, "paint without traversal"};
  if (state.painted_count() > state.step + 1) return {true, "paint without traversal"};
  if (state.score != state.filled_count()) return {true, "score inconsistent with filled segments"};

  // Non-owning alias: new_game only needs the pointer for this call.
  const game::ConfigPtr base_ptr(game::ConfigPtr{}, &base);
  game::GameState reference = game::new_game(base_ptr);
  const std::uint64_t ticks = state.won ? state.step - 1 : state.step;
  for (std::uint64_t t = 1; t <= ticks; ++t)
    for (auto& e : reference.enemies) e = game::enemy_advance(e, base.board, base, t);
  if (reference.enemies.size() != state.enemies.size()) {
    return {true, "enemy set differs from the start configuration"};
  }
  for (std::size_t i = 0; i < state.enemies.size(); ++i) {
    const auto& a = reference.enemies[i];
    const auto& b = state.enemies[i];
    if (a.position != b.position || a.protocol != b.protocol) {
      return {true, "enemy " + std::to_string(i) + " is not where any game reaches at step " +
                        std::to_string(state.step)};
    }
  }

  const auto distance = base.board.distances_from(base.player_start);
  const int d = distance[base.board.index(state.player.position)];
  if (d < 0 || static_cast<std::uint64_t>(d) > state.step) {
    return {true, "player position not reachable within " + std::to_string(state.step) + " steps"};
  }
  return {false, "unknown"};
}

}  // namespace intervenidar::interventions
