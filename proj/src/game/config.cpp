#include "intervenidar/game/config.hpp"

#include <fstream>
#include <set>

#include "intervenidar/mdp/digest.hpp"

namespace intervenidar::game {

using nlohmann::json;

namespace {

constexpr std::string_view kFormatName = "intervenidar-board";
constexpr int kFormatVersion = 1;

json pos_json(TilePos p) { return json::array({p.x, p.y}); }

TilePos pos_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("position must be a [x, y] pair");
  return {j[0].get<int>(), j[1].get<int>()};
}

}  // namespace

std::string to_string(ProtocolKind p) {
  switch (p) {
    case ProtocolKind::kLookup: return "lookup";
    case ProtocolKind::kPerimeter: return "perimeter";
    case ProtocolKind::kLocalFeature: return "local-feature";
  }
  return "?";
}

ProtocolKind protocol_from_string(const std::string& s) {
  if (s == "lookup") return ProtocolKind::kLookup;
  if (s == "perimeter") return ProtocolKind::kPerimeter;
  if (s == "local-feature") return ProtocolKind::kLocalFeature;
  throw ConfigError("unknown movement protocol '" + s + "'");
}

void GameConfig::validate() const {
  if (expected_segments && static_cast<int>(board.segments().size()) != *expected_segments) {
    throw BoardError(BoardError::Defect::kSegmentCount,
                     "board: " + std::to_string(board.segments().size()) + " segments, config declares " +
                         std::to_string(*expected_segments));
  }
  if (!board.is_track(player_start)) throw ConfigError("player start " + to_string(player_start) + " is not on track");
  for (const auto& [name, table] : lookup_tables) {
    if (table.empty()) throw ConfigError("lookup table '" + name + "' is empty");
    for (std::size_t i = 0; i < table.size(); ++i) {
      const TilePos p = table[i];
      if (!board.is_track(p)) {
        throw ConfigError("lookup table '" + name + "' entry " + std::to_string(i) + " " + to_string(p) +
                          " is off track");
      }
      const TilePos next = table[(i + 1) % table.size()];
      if (manhattan(p, next) > 1) {
        throw ConfigError("lookup table '" + name + "' entry " + std::to_string(i) + " -> " +
                          std::to_string((i + 1) % table.size()) + " is not an adjacent move or a stall");
      }
    }
  }
  for (std::size_t i = 0; i < enemies.size(); ++i) {
    const auto& e = enemies[i];
    TilePos start = e.start;
    if (e.protocol == ProtocolKind::kLookup) {
      const auto it = lookup_tables.find(e.table);
      if (it == lookup_tables.end()) {
        throw ConfigError("enemy " + std::to_string(i) + " references missing lookup table '" + e.table + "'");
      }
      start = it->second.front();
    } else if (!board.is_track(start)) {
      throw ConfigError("enemy " + std::to_string(i) + " start " + to_string(start) + " is not on track");
    }
    if (start == player_start) throw ConfigError("enemy " + std::to_string(i) + " starts on the player");
  }
}

json GameConfig::to_json() const {
  json j;
  j["format"] = kFormatName;
  j["version"] = kFormatVersion;
  j["name"] = name;
  j["tiles"] = board.rows();
  if (expected_segments) j["expected_segments"] = *expected_segments;
  j["player"] = {{"start", pos_json(player_start)}, {"heading", to_string(player_heading)}};
  json es = json::array();
  for (const auto& e : enemies) {
    json je;
    je["protocol"] = to_string(e.protocol);
    if (e.protocol == ProtocolKind::kLookup) {
      je["table"] = e.table;
    } else {
      je["start"] = pos_json(e.start);
      je["heading"] = to_string(e.heading);
      if (e.protocol == ProtocolKind::kPerimeter) je["sense"] = e.clockwise ? "clockwise" : "counterclockwise";
    }
    es.push_back(je);
  }
  j["enemies"] = es;
  json tables = json::object();
  for (const auto& [tname, table] : lookup_tables) {
    json entries = json::array();
    for (auto p : table) entries.push_back(pos_json(p));
    tables[tname] = entries;
  }
  j["lookup_tables"] = tables;
  return j;
}

GameConfig GameConfig::from_json(const json& j) {
  GameConfig c;
  try {
    if (j.at("format").get<std::string>() != kFormatName) throw ConfigError("not an intervenidar-board document");
    if (j.at("version").get<int>() != kFormatVersion) throw ConfigError("unsupported board format version");
    c.name = j.value("name", "");
    c.board = Board::from_rows(j.at("tiles").get<std::vector<std::string>>());
    if (j.contains("expected_segments")) c.expected_segments = j["expected_segments"].get<int>();
    const auto& player = j.at("player");
    c.player_start = pos_from_json(player.at("start"));
    c.player_heading = direction_from_string(player.value("heading", "left"));
    for (const auto& je : j.at("enemies")) {
      EnemySpec e;
      e.protocol = protocol_from_string(je.at("protocol").get<std::string>());
      if (e.protocol == ProtocolKind::kLookup) {
        e.table = je.at("table").get<std::string>();
      } else {
        e.start = pos_from_json(je.at("start"));
        e.heading = direction_from_string(je.value("heading", "right"));
        const auto sense = je.value("sense", "clockwise");
        if (sense != "clockwise" && sense != "counterclockwise") throw ConfigError("unknown sense '" + sense + "'");
        e.clockwise = sense == "clockwise";
      }
      c.enemies.push_back(e);
    }
    if (j.contains("lookup_tables")) {
      for (const auto& [tname, entries] : j["lookup_tables"].items()) {
        std::vector<TilePos> table;
        for (const auto& p : entries) table.push_back(pos_from_json(p));
        c.lookup_tables[tname] = std::move(table);
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("board config: ") + e.what());
  }
  c.validate();
  return c;
}

GameConfig GameConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open board config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("board config " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

std::string GameConfig::hash() const {
  if (!cached_hash.empty()) return cached_hash;
  return mdp::sha256(to_json().dump()).hex();
}

ConfigPtr load_config(const std::filesystem::path& path) { return make_config(GameConfig::load(path)); }

ConfigPtr make_config(GameConfig config) {
  config.validate();
  config.cached_hash.clear();
  config.cached_hash = config.hash();
  return std::make_shared<const GameConfig>(std::move(config));
}

}  // namespace intervenidar::game
