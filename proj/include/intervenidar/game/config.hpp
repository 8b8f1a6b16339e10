#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "intervenidar/game/board.hpp"

namespace intervenidar::game {

enum class ProtocolKind : std::uint8_t { kLookup = 0, kPerimeter = 1, kLocalFeature = 2 };

std::string to_string(ProtocolKind p);
ProtocolKind protocol_from_string(const std::string& s);

struct EnemySpec {
  ProtocolKind protocol = ProtocolKind::kLookup;
  // Lookup enemies start at table[0]; `start` is only read for the others.
  TilePos start;
  Direction heading = Direction::kRight;
  std::string table;      // lookup
  bool clockwise = true;  // perimeter
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Everything needed to build the canonical start state: the board, the
// player start, enemy start data and the lookup tables that drive
// lookup-protocol enemies. Stored as a JSON document ("intervenidar-board").
struct GameConfig {
  std::string name;
  Board board;
  TilePos player_start;
  Direction player_heading = Direction::kLeft;
  std::vector<EnemySpec> enemies;
  std::map<std::string, std::vector<TilePos>> lookup_tables;
  std::optional<int> expected_segments;

  // Throws BoardError / ConfigError.
  void validate() const;

  nlohmann::json to_json() const;
  static GameConfig from_json(const nlohmann::json& j);
  static GameConfig load(const std::filesystem::path& path);

  // sha256 of the canonical JSON serialisation, hex. Cached by
  // load_config/make_config, which hand out immutable configs.
  std::string hash() const;

  std::string cached_hash;
};

using ConfigPtr = std::shared_ptr<const GameConfig>;

ConfigPtr load_config(const std::filesystem::path& path);
ConfigPtr make_config(GameConfig config);

}  // namespace intervenidar::game
