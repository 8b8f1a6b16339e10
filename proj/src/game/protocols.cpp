#include "intervenidar/game/protocols.hpp"

namespace intervenidar::game {

namespace {

bool has(std::uint8_t mask, Direction d) { return (mask >> static_cast<int>(d)) & 1u; }

}  // namespace

ProtocolKind protocol_kind(const ProtocolState& s) {
  return static_cast<ProtocolKind>(s.index());
}

std::vector<const std::vector<TilePos>*> ordered_tables(const GameConfig& config) {
  std::vector<const std::vector<TilePos>*> out;
  for (const auto& [name, table] : config.lookup_tables) out.push_back(&table);
  return out;
}

LocalMove local_feature_move(std::uint8_t mask, Direction heading, std::uint32_t turn_counter) {
  Direction options[3];
  int count = 0;
  for (Direction d : {turn_left(heading), heading, turn_right(heading)})
    if (has(mask, d)) options[count++] = d;
  if (count == 0) return {reverse(heading), turn_counter};
  if (count == 1) return {options[0], turn_counter};
  return {options[turn_counter % static_cast<std::uint32_t>(count)], turn_counter + 1};
}

Direction perimeter_move(std::uint8_t mask, Direction heading, bool clockwise) {
  const Direction outward = clockwise ? turn_left(heading) : turn_right(heading);
  const Direction inward = clockwise ? turn_right(heading) : turn_left(heading);
  for (Direction d : {outward, heading, inward, reverse(heading)})
    if (has(mask, d)) return d;
  return heading;
}

TilePos lookup_position(const LookupState& s, const GameConfig& config, std::uint64_t time) {
  const auto tables = ordered_tables(config);
  const auto& table = *tables.at(static_cast<std::size_t>(s.table));
  return table[(time + s.phase) % table.size()];
}

EntityState enemy_advance(const EntityState& enemy, const Board& board, const GameConfig& config,
                          std::uint64_t time) {
  EntityState next = enemy;
  if (const auto* lookup = std::get_if<LookupState>(&enemy.protocol)) {
    next.position = lookup_position(*lookup, config, time);
    if (next.position != enemy.position) {
      for (Direction d : kDirections)
        if (neighbor(enemy.position, d) == next.position) next.heading = d;
    }
    return next;
  }
  const std::uint8_t mask = board.neighbor_mask(enemy.position);
  if (mask == 0) return next;  // isolated tile: stall
  Direction d = enemy.heading;
  if (const auto* perimeter = std::get_if<PerimeterState>(&enemy.protocol)) {
    d = perimeter_move(mask, enemy.heading, perimeter->clockwise);
  } else {
    auto& local = std::get<LocalFeatureState>(next.protocol);
    const LocalMove move = local_feature_move(mask, enemy.heading, local.turn_counter);
    d = move.direction;
    local.turn_counter = move.turn_counter;
  }
  next.position = neighbor(enemy.position, d);
  next.heading = d;
  return next;
}

}  // namespace intervenidar::game
