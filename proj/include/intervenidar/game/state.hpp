#pragma once

#include <cstdint>
#include <memory>
#include <variant>
#include <vector>

#include "intervenidar/game/board.hpp"
#include "intervenidar/game/config.hpp"

namespace intervenidar::game {

struct LookupState {
  int table = 0;           // index into the config's lookup tables (sorted by name)
  std::uint32_t phase = 0;  // position = table[(time + phase) mod length]

  bool operator==(const LookupState&) const = default;
};

struct PerimeterState {
  bool clockwise = true;

  bool operator==(const PerimeterState&) const = default;
};

struct LocalFeatureState {
  std::uint32_t turn_counter = 0;

  bool operator==(const LocalFeatureState&) const = default;
};

using ProtocolState = std::variant<LookupState, PerimeterState, LocalFeatureState>;

ProtocolKind protocol_kind(const ProtocolState& s);

struct EntityState {
  TilePos position;
  Direction heading = Direction::kLeft;
  // Unused (monostate-like LocalFeatureState{}) for the player.
  ProtocolState protocol = LocalFeatureState{};

  bool operator==(const EntityState&) const = default;
};

struct GameState {
  ConfigPtr config;
  // Usually config->board; interventions that change topology swap in a
  // modified copy.
  std::shared_ptr<const Board> board;
  EntityState player;
  std::vector<EntityState> enemies;
  std::vector<std::uint8_t> painted;  // per tile
  std::vector<std::uint8_t> filled;   // per segment
  int score = 0;
  std::uint64_t step = 0;
  bool terminal = false;
  bool won = false;
  bool dead = false;

  bool is_painted(TilePos p) const { return painted[board->index(p)] != 0; }
  bool segment_filled(int id) const { return filled[static_cast<std::size_t>(id)] != 0; }
  int filled_count() const;
  std::size_t painted_count() const;
};

// Lookup tables ordered by name; LookupState::table indexes this list.
std::vector<const std::vector<TilePos>*> ordered_tables(const GameConfig& config);

}  // namespace intervenidar::game
