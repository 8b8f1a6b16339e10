#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "intervenidar/game/state.hpp"

namespace intervenidar::game {

// JSON form of a GameState ("intervenidar-state"). The board layout and the
// paint map are stored as rows of characters; the config is referenced by
// hash and must be supplied when reading.
nlohmann::json state_to_json(const GameState& state);
GameState state_from_json(const nlohmann::json& j, ConfigPtr config);

void save_state(const GameState& state, const std::filesystem::path& path);
GameState load_state(const std::filesystem::path& path, ConfigPtr config);

}  // namespace intervenidar::game
