#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "intervenidar/game/config.hpp"
#include "intervenidar/game/game.hpp"

namespace testing_support {

namespace fs = std::filesystem;
using namespace intervenidar;

inline fs::path data_dir() { return INTERVENIDAR_DATA_DIR; }
inline fs::path golden_dir() { return INTERVENIDAR_GOLDEN_DIR; }

inline game::ConfigPtr default_config() {
  static const game::ConfigPtr config = game::load_config(data_dir() / "boards/default.json");
  return config;
}

inline game::ConfigPtr enemy_free_config() {
  static const game::ConfigPtr config = [] {
    game::GameConfig c = *default_config();
    c.name = "default-no-enemies";
    c.enemies.clear();
    c.lookup_tables.clear();
    c.cached_hash.clear();
    return game::make_config(std::move(c));
  }();
  return config;
}

// 5x5 ring with the player at the bottom middle and one lookup enemy whose
// table is given by the caller.
inline game::ConfigPtr ring_config(std::vector<game::TilePos> enemy_table) {
  game::GameConfig c;
  c.name = "ring";
  c.board = game::Board::from_rows({"#####", "#...#", "#...#", "#...#", "#####"});
  c.player_start = {2, 4};
  if (!enemy_table.empty()) {
    c.lookup_tables["t"] = std::move(enemy_table);
    game::EnemySpec e;
    e.protocol = game::ProtocolKind::kLookup;
    e.table = "t";
    c.enemies.push_back(e);
  }
  return game::make_config(std::move(c));
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream(path, std::ios::binary) << text;
}

// Compares against a checked-in golden file. Setting
// INTERVENIDAR_UPDATE_GOLDEN=1 rewrites the file instead.
inline void expect_golden(const std::string& name, const std::string& actual) {
  const fs::path path = golden_dir() / name;
  if (const char* update = std::getenv("INTERVENIDAR_UPDATE_GOLDEN"); update && std::string(update) == "1") {
    write_file(path, actual);
    return;
  }
  ASSERT_TRUE(fs::exists(path)) << "missing golden file " << path << " (run with INTERVENIDAR_UPDATE_GOLDEN=1)";
  EXPECT_TRUE(read_file(path) == actual) << "output differs from golden file " << path;
}

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("intervenidar-test-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

}  // namespace testing_support
