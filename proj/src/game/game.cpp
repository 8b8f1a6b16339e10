#include "intervenidar/game/game.hpp"

#include <algorithm>

#include "intervenidar/game/protocols.hpp"

namespace intervenidar::game {

int GameState::filled_count() const {
  return static_cast<int>(std::count(filled.begin(), filled.end(), std::uint8_t{1}));
}

std::size_t GameState::painted_count() const {
  return static_cast<std::size_t>(std::count(painted.begin(), painted.end(), std::uint8_t{1}));
}

GameState new_game(ConfigPtr config) {
  if (!config) throw GameError("new_game: null config");
  GameState s;
  s.board = std::shared_ptr<const Board>(config, &config->board);
  s.player.position = config->player_start;
  s.player.heading = config->player_heading;
  std::vector<std::string> table_names;
  for (const auto& [name, table] : config->lookup_tables) table_names.push_back(name);
  for (const auto& spec : config->enemies) {
    EntityState e;
    switch (spec.protocol) {
      case ProtocolKind::kLookup: {
        const auto it = std::find(table_names.begin(), table_names.end(), spec.table);
        if (it == table_names.end()) throw GameError("new_game: missing lookup table '" + spec.table + "'");
        LookupState ls;
        ls.table = static_cast<int>(it - table_names.begin());
        e.protocol = ls;
        e.position = config->lookup_tables.at(spec.table).front();
        e.heading = spec.heading;
        break;
      }
      case ProtocolKind::kPerimeter:
        e.protocol = PerimeterState{spec.clockwise};
        e.position = spec.start;
        e.heading = spec.heading;
        break;
      case ProtocolKind::kLocalFeature:
        e.protocol = LocalFeatureState{};
        e.position = spec.start;
        e.heading = spec.heading;
        break;
    }
    s.enemies.push_back(e);
  }
  s.painted.assign(s.board->tile_count(), 0);
  s.filled.assign(s.board->segments().size(), 0);
  s.config = std::move(config);
  return s;
}

std::vector<int> refresh_filled(GameState& state) {
  std::vector<int> newly;
  const auto& segments = state.board->segments();
  state.filled.resize(segments.size(), 0);
  for (const auto& seg : segments) {
    if (state.filled[seg.id]) continue;
    const bool all = std::all_of(seg.tiles.begin(), seg.tiles.end(),
                                 [&](TilePos p) { return state.is_painted(p); });
    if (all) {
      state.filled[seg.id] = 1;
      newly.push_back(seg.id);
    }
  }
  return newly;
}

double step_in_place(GameState& s, Action action) {
  if (s.terminal) throw GameError("step: game is already terminal");
  const int action_index = static_cast<int>(action);
  if (action_index < 0 || action_index >= kActionCount) throw GameError("step: invalid action");
  const Board& board = *s.board;
  const int score_before = s.score;
  const TilePos player_before = s.player.position;

  if (const auto dir = action_direction(action)) {
    const TilePos target = neighbor(player_before, *dir);
    if (board.is_track(target)) {
      s.player.position = target;
      s.player.heading = *dir;
      for (TilePos p : {player_before, target}) {
        auto& cell = s.painted[board.index(p)];
        if (cell) continue;
        cell = 1;
        for (int id : board.segments_at(p)) {
          if (s.filled[id]) continue;
          const auto& tiles = board.segments()[id].tiles;
          if (std::all_of(tiles.begin(), tiles.end(), [&](TilePos t) { return s.is_painted(t); })) {
            s.filled[id] = 1;
            ++s.score;
          }
        }
      }
    }
  }

  ++s.step;
  if (s.filled_count() == static_cast<int>(s.filled.size())) {
    s.terminal = true;
    s.won = true;
  } else {
    for (auto& enemy : s.enemies) {
      const TilePos enemy_before = enemy.position;
      enemy = enemy_advance(enemy, board, *s.config, s.step);
      const bool same_tile = enemy.position == s.player.position;
      const bool swapped = enemy.position == player_before && enemy_before == s.player.position;
      if (same_tile || swapped) {
        s.terminal = true;
        s.dead = true;
      }
    }
  }
  return s.score > score_before ? 1.0 : 0.0;
}

mdp::StepResult<GameState> step(GameState state, Action action) {
  const double reward = step_in_place(state, action);
  const bool terminal = state.terminal;
  return {std::move(state), reward, terminal};
}

mdp::Digest latent_digest(const GameState& s) {
  mdp::DigestBuilder b;
  b.str("intervenidar-state-v1");
  const Board& board = *s.board;
  b.i32(board.width()).i32(board.height());
  // Layout as a packed bitmap.
  std::vector<std::uint8_t> bits((board.tile_count() + 7) / 8, 0);
  std::vector<std::uint8_t> paint((board.tile_count() + 7) / 8, 0);
  for (std::size_t i = 0; i < board.tile_count(); ++i) {
    if (board.is_track(board.position(i))) bits[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
    if (s.painted[i]) paint[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
  }
  b.bytes(bits).bytes(paint);
  auto entity = [&](const EntityState& e) {
    b.i32(e.position.x).i32(e.position.y).u8(static_cast<std::uint8_t>(e.heading));
    b.u8(static_cast<std::uint8_t>(e.protocol.index()));
    std::visit(
        [&](const auto& ps) {
          using T = std::decay_t<decltype(ps)>;
          if constexpr (std::is_same_v<T, LookupState>) b.i32(ps.table).u32(ps.phase);
          else if constexpr (std::is_same_v<T, PerimeterState>) b.u8(ps.clockwise ? 1 : 0);
          else b.u32(ps.turn_counter);
        },
        e.protocol);
  };
  entity(s.player);
  b.u32(static_cast<std::uint32_t>(s.enemies.size()));
  for (const auto& e : s.enemies) entity(e);
  b.i32(s.score).u64(s.step);
  b.u8(s.terminal ? 1 : 0).u8(s.won ? 1 : 0).u8(s.dead ? 1 : 0);
  return b.finish();
}

}  // namespace intervenidar::game
