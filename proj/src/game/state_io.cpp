#include "intervenidar/game/state_io.hpp"

#include <fstream>

#include "intervenidar/game/game.hpp"

namespace intervenidar::game {

using nlohmann::json;

namespace {

json entity_json(const EntityState& e, bool with_protocol) {
  json j;
  j["position"] = json::array({e.position.x, e.position.y});
  j["heading"] = to_string(e.heading);
  if (with_protocol) {
    j["protocol"] = to_string(protocol_kind(e.protocol));
    std::visit(
        [&](const auto& ps) {
          using T = std::decay_t<decltype(ps)>;
          if constexpr (std::is_same_v<T, LookupState>) {
            j["table"] = ps.table;
            j["phase"] = ps.phase;
          } else if constexpr (std::is_same_v<T, PerimeterState>) {
            j["sense"] = ps.clockwise ? "clockwise" : "counterclockwise";
          } else {
            j["turn_counter"] = ps.turn_counter;
          }
        },
        e.protocol);
  }
  return j;
}

EntityState entity_from_json(const json& j, bool with_protocol) {
  EntityState e;
  e.position = {j.at("position").at(0).get<int>(), j.at("position").at(1).get<int>()};
  e.heading = direction_from_string(j.at("heading").get<std::string>());
  if (with_protocol) {
    switch (protocol_from_string(j.at("protocol").get<std::string>())) {
      case ProtocolKind::kLookup:
        e.protocol = LookupState{j.at("table").get<int>(), j.at("phase").get<std::uint32_t>()};
        break;
      case ProtocolKind::kPerimeter:
        e.protocol = PerimeterState{j.at("sense").get<std::string>() == "clockwise"};
        break;
      case ProtocolKind::kLocalFeature:
        e.protocol = LocalFeatureState{j.at("turn_counter").get<std::uint32_t>()};
        break;
    }
  }
  return e;
}

}  // namespace

json state_to_json(const GameState& s) {
  json j;
  j["format"] = "intervenidar-state";
  j["version"] = 1;
  j["config_hash"] = s.config->hash();
  j["tiles"] = s.board->rows();
  std::vector<std::string> paint(s.board->height(), std::string(s.board->width(), '.'));
  for (std::size_t i = 0; i < s.painted.size(); ++i) {
    if (!s.painted[i]) continue;
    const TilePos p = s.board->position(i);
    paint[p.y][p.x] = '+';
  }
  j["painted"] = paint;
  j["player"] = entity_json(s.player, false);
  json enemies = json::array();
  for (const auto& e : s.enemies) enemies.push_back(entity_json(e, true));
  j["enemies"] = enemies;
  j["score"] = s.score;
  j["step"] = s.step;
  j["terminal"] = s.terminal;
  j["won"] = s.won;
  j["dead"] = s.dead;
  return j;
}

GameState state_from_json(const json& j, ConfigPtr config) {
  try {
    if (j.at("format").get<std::string>() != "intervenidar-state") throw FormatError("not an intervenidar-state document");
    if (j.at("config_hash").get<std::string>() != config->hash()) {
      throw ConfigMismatchError("state was saved against config " + j["config_hash"].get<std::string>() +
                                ", supplied config is " + config->hash());
    }
    GameState s = new_game(config);
    const auto rows = j.at("tiles").get<std::vector<std::string>>();
    if (rows != config->board.rows()) s.board = std::make_shared<const Board>(Board::from_rows(rows));
    const auto paint = j.at("painted").get<std::vector<std::string>>();
    if (static_cast<int>(paint.size()) != s.board->height()) throw FormatError("state: paint map height mismatch");
    s.painted.assign(s.board->tile_count(), 0);
    for (int y = 0; y < s.board->height(); ++y) {
      if (static_cast<int>(paint[y].size()) != s.board->width()) throw FormatError("state: paint map width mismatch");
      for (int x = 0; x < s.board->width(); ++x) {
        if (paint[y][x] != '+') continue;
        if (!s.board->is_track({x, y})) throw FormatError("state: painted tile " + to_string(TilePos{x, y}) + " is off track");
        s.painted[s.board->index({x, y})] = 1;
      }
    }
    s.filled.assign(s.board->segments().size(), 0);
    refresh_filled(s);
    s.player = entity_from_json(j.at("player"), false);
    s.enemies.clear();
    for (const auto& je : j.at("enemies")) s.enemies.push_back(entity_from_json(je, true));
    s.score = j.at("score").get<int>();
    s.step = j.at("step").get<std::uint64_t>();
    s.terminal = j.at("terminal").get<bool>();
    s.won = j.at("won").get<bool>();
    s.dead = j.at("dead").get<bool>();
    if (!s.board->is_track(s.player.position)) throw FormatError("state: player is off track");
    for (const auto& e : s.enemies)
      if (!s.board->is_track(e.position)) throw FormatError("state: enemy is off track");
    return s;
  } catch (const json::exception& e) {
    throw FormatError(std::string("state: ") + e.what());
  }
}

void save_state(const GameState& state, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << state_to_json(state).dump(1) << '\n';
}

GameState load_state(const std::filesystem::path& path, ConfigPtr config) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError("state " + path.string() + ": " + e.what());
  }
  return state_from_json(j, std::move(config));
}

}  // namespace intervenidar::game
