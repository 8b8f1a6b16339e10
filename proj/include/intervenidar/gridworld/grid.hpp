#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "intervenidar/mdp/error.hpp"
#include "intervenidar/mdp/mdp.hpp"

namespace intervenidar::gridworld {

struct Cell {
  int col = 0;
  int row = 0;  // row 0 is the top of the map

  auto operator<=>(const Cell&) const = default;
};

std::string to_string(Cell c);

// Every action advances one column; the row changes by 0, -1 or +1.
enum class GridAction : int { kRight = 0, kRightUp = 1, kRightDown = 2 };
inline constexpr int kGridActionCount = 3;

inline Cell apply_action(Cell c, GridAction a) {
  static constexpr std::array<int, 3> kRowDelta{0, -1, 1};
  return {c.col + 1, c.row + kRowDelta[static_cast<int>(a)]};
}

using CellSet = std::set<Cell>;

class GridError : public Error {
 public:
  using Error::Error;
};

// A GridWorld map. Plain-text form, one character per cell:
//   '.' empty   '#' wall   'S' start   'G' goal   '*' start and goal
// Lines starting with ';' are comments.
struct GridConfig {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> walls;  // row-major
  Cell start;
  Cell goal;

  bool in_bounds(Cell c) const { return c.col >= 0 && c.col < width && c.row >= 0 && c.row < height; }
  bool is_wall(Cell c) const { return walls[index(c)] != 0; }
  bool open(Cell c) const { return in_bounds(c) && !is_wall(c); }
  std::size_t index(Cell c) const { return static_cast<std::size_t>(c.row) * width + c.col; }
  std::size_t cell_count() const { return static_cast<std::size_t>(width) * height; }

  // Episodes end on the goal or in the last column.
  bool terminal(Cell c) const { return c == goal || c.col == width - 1; }

  CellSet open_cells() const;

  void validate() const;
  std::string to_text() const;
  void set_wall(Cell c, bool wall = true) { walls[index(c)] = wall ? 1 : 0; }

  static GridConfig empty(int width, int height, Cell start, Cell goal);
  static GridConfig parse(std::string_view text);
  static GridConfig load(const std::filesystem::path& path);
};

// Deterministic GridWorld environment. A move that leaves the grid or enters a
// wall ends the episode in place with reward 0; reaching the goal pays +1.
class GridWorldEnv {
 public:
  explicit GridWorldEnv(GridConfig config);

  std::string env_id() const { return "gridworld"; }
  std::string config_hash() const { return config_hash_; }
  mdp::MdpSpec spec() const { return {kGridActionCount, 1.0}; }

  void reset(std::uint64_t seed = 0);
  // Starts the next episode from an arbitrary open cell.
  void set_start(Cell cell);
  mdp::StepResult<Cell> step(int action);

  mdp::Digest digest() const;
  bool terminal() const { return terminal_; }
  double cumulative_reward() const { return cumulative_reward_; }
  Cell cell() const { return cell_; }
  const GridConfig& config() const { return config_; }

 private:
  GridConfig config_;
  std::string config_hash_;
  Cell cell_;
  bool terminal_ = false;
  bool crashed_ = false;
  double cumulative_reward_ = 0.0;
};

// A deterministic GridWorld policy as a policy source for run_episode.
class GridPolicyAgent {
 public:
  explicit GridPolicyAgent(std::function<GridAction(Cell)> policy) : policy_(std::move(policy)) {}
  void begin_episode(std::uint64_t) {}
  mdp::PolicyResponse act(const GridWorldEnv& env) const {
    return {static_cast<int>(policy_(env.cell())), {}, {}, {}};
  }

 private:
  std::function<GridAction(Cell)> policy_;
};

}  // namespace intervenidar::gridworld
