#include "intervenidar/gridworld/grid.hpp"

#include <fstream>
#include <sstream>

namespace intervenidar::gridworld {

std::string to_string(Cell c) { return "(col " + std::to_string(c.col) + ", row " + std::to_string(c.row) + ")"; }

CellSet GridConfig::open_cells() const {
  CellSet out;
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c)
      if (!is_wall({c, r})) out.insert({c, r});
  return out;
}

void GridConfig::validate() const {
  if (width <= 0 || height <= 0) throw GridError("grid dimensions must be positive");
  if (walls.size() != cell_count()) throw GridError("wall mask size does not match dimensions");
  if (!in_bounds(start) || is_wall(start)) throw GridError("start cell " + to_string(start) + " is not an open cell");
  if (!in_bounds(goal) || is_wall(goal)) throw GridError("goal cell " + to_string(goal) + " is not an open cell");
}

std::string GridConfig::to_text() const {
  std::string out;
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const Cell cell{c, r};
      char ch = is_wall(cell) ? '#' : '.';
      if (cell == start && cell == goal) ch = '*';
      else if (cell == start) ch = 'S';
      else if (cell == goal) ch = 'G';
      out.push_back(ch);
    }
    out.push_back('\n');
  }
  return out;
}

GridConfig GridConfig::empty(int width, int height, Cell start, Cell goal) {
  GridConfig g;
  g.width = width;
  g.height = height;
  g.walls.assign(static_cast<std::size_t>(width) * height, 0);
  g.start = start;
  g.goal = goal;
  g.validate();
  return g;
}

GridConfig GridConfig::parse(std::string_view text) {
  std::vector<std::string> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == ';') continue;
    rows.push_back(line);
  }
  if (rows.empty()) throw GridError("grid map is empty");
  GridConfig g;
  g.height = static_cast<int>(rows.size());
  g.width = static_cast<int>(rows[0].size());
  g.walls.assign(g.cell_count(), 0);
  int starts = 0;
  int goals = 0;
  for (int r = 0; r < g.height; ++r) {
    if (static_cast<int>(rows[r].size()) != g.width) {
      throw GridError("grid map row " + std::to_string(r) + " has length " + std::to_string(rows[r].size()) +
                      ", expected " + std::to_string(g.width));
    }
    for (int c = 0; c < g.width; ++c) {
      switch (rows[r][c]) {
        case '.': break;
        case '#': g.walls[g.index({c, r})] = 1; break;
        case 'S': g.start = {c, r}; ++starts; break;
        case 'G': g.goal = {c, r}; ++goals; break;
        case '*': g.start = g.goal = {c, r}; ++starts; ++goals; break;
        default:
          throw GridError(std::string("grid map: unknown character '") + rows[r][c] + "' at " + to_string({c, r}));
      }
    }
  }
  if (starts != 1 || goals != 1) throw GridError("grid map needs exactly one start and one goal");
  g.validate();
  return g;
}

GridConfig GridConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw GridError("cannot open grid map " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

GridWorldEnv::GridWorldEnv(GridConfig config) : config_(std::move(config)) {
  config_.validate();
  config_hash_ = mdp::sha256(config_.to_text()).hex();
  reset();
}

void GridWorldEnv::reset(std::uint64_t) { set_start(config_.start); }

void GridWorldEnv::set_start(Cell cell) {
  if (!config_.open(cell)) throw GridError("start cell " + to_string(cell) + " is not open");
  cell_ = cell;
  crashed_ = false;
  terminal_ = config_.terminal(cell);
  cumulative_reward_ = 0.0;
}

mdp::StepResult<Cell> GridWorldEnv::step(int action) {
  if (terminal_) throw GridError("step after terminal");
  if (action < 0 || action >= kGridActionCount) throw GridError("invalid action " + std::to_string(action));
  const Cell next = apply_action(cell_, static_cast<GridAction>(action));
  double reward = 0.0;
  if (!config_.open(next)) {
    crashed_ = true;
    terminal_ = true;
  } else {
    cell_ = next;
    if (cell_ == config_.goal) reward = 1.0;
    terminal_ = config_.terminal(cell_);
  }
  cumulative_reward_ += reward;
  return {cell_, reward, terminal_};
}

mdp::Digest GridWorldEnv::digest() const {
  mdp::DigestBuilder b;
  b.str("gridworld").i32(cell_.col).i32(cell_.row).u8(terminal_ ? 1 : 0).u8(crashed_ ? 1 : 0);
  return b.finish();
}

}  // namespace intervenidar::gridworld
