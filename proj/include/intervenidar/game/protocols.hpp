#pragma once

#include <cstdint>
#include <utility>

#include "intervenidar/game/board.hpp"
#include "intervenidar/game/config.hpp"
#include "intervenidar/game/state.hpp"

namespace intervenidar::game {

// Local-feature rule: a pure function of the 4-neighbourhood track mask, the
// current heading and the turn counter. Straight track and corners have one
// forward option; at a junction the enemy cycles through the available
// {left, straight, right} options using the counter; dead ends reverse.
struct LocalMove {
  Direction direction;
  std::uint32_t turn_counter;
};
LocalMove local_feature_move(std::uint8_t neighbor_mask, Direction heading, std::uint32_t turn_counter);

// Perimeter rule: wall-following that keeps the outside of the track on the
// enemy's left (clockwise) or right (counterclockwise). Started on the outer
// loop it circles the board's perimeter.
Direction perimeter_move(std::uint8_t neighbor_mask, Direction heading, bool clockwise);

// Advance one enemy to time `time` (the step counter after the move).
// Every protocol yields an adjacent on-track tile or a stall.
EntityState enemy_advance(const EntityState& enemy, const Board& board, const GameConfig& config,
                          std::uint64_t time);

// Position of a lookup enemy at `time`.
TilePos lookup_position(const LookupState& s, const GameConfig& config, std::uint64_t time);

}  // namespace intervenidar::game
