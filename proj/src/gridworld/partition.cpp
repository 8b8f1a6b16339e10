#include "intervenidar/gridworld/partition.hpp"

#include <algorithm>
#include <deque>
#include <iterator>

namespace intervenidar::gridworld {

PolicyError::PolicyError(Cell from_cell, Cell to_cell)
    : GridError("policy leaves the open grid: from " + to_string(from_cell) + " to " + to_string(to_cell)),
      from(from_cell),
      to(to_cell) {}

CellSet reachable_set(const GridConfig& config) {
  config.validate();
  CellSet seen{config.start};
  std::deque<Cell> frontier{config.start};
  while (!frontier.empty()) {
    const Cell c = frontier.front();
    frontier.pop_front();
    if (config.terminal(c)) continue;
    for (int a = 0; a < kGridActionCount; ++a) {
      const Cell next = apply_action(c, static_cast<GridAction>(a));
      if (config.open(next) && seen.insert(next).second) frontier.push_back(next);
    }
  }
  return seen;
}

std::vector<Cell> on_policy_path(const GridConfig& config, const GridPolicy& policy) {
  config.validate();
  std::vector<Cell> path{config.start};
  Cell c = config.start;
  // Every move advances one column, so the path has at most `width` cells.
  while (!config.terminal(c)) {
    const Cell next = apply_action(c, policy(c));
    if (!config.open(next)) throw PolicyError(c, next);
    path.push_back(next);
    c = next;
  }
  return path;
}

StatePartition partition(const GridConfig& config, const GridPolicy& policy) {
  StatePartition p;
  const auto path = on_policy_path(config, policy);
  p.on_policy.insert(path.begin(), path.end());
  const CellSet reachable = reachable_set(config);
  std::set_difference(reachable.begin(), reachable.end(), p.on_policy.begin(), p.on_policy.end(),
                      std::inserter(p.off_policy, p.off_policy.end()));
  const CellSet all = config.open_cells();
  std::set_difference(all.begin(), all.end(), reachable.begin(), reachable.end(),
                      std::inserter(p.unreachable, p.unreachable.end()));
  return p;
}

std::string StatePartition::to_text(const GridConfig& config) const {
  std::string out;
  for (int r = 0; r < config.height; ++r) {
    for (int c = 0; c < config.width; ++c) {
      const Cell cell{c, r};
      char ch = '?';
      if (config.is_wall(cell)) ch = '#';
      else if (on_policy.contains(cell)) ch = 'P';
      else if (off_policy.contains(cell)) ch = 'o';
      else if (unreachable.contains(cell)) ch = 'x';
      out.push_back(ch);
    }
    out.push_back('\n');
  }
  return out;
}

}  // namespace intervenidar::gridworld
