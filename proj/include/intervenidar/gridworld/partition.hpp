#pragma once

#include <functional>
#include <string>

#include "intervenidar/gridworld/grid.hpp"

namespace intervenidar::gridworld {

using GridPolicy = std::function<GridAction(Cell)>;

struct StatePartition {
  CellSet on_policy;
  CellSet off_policy;
  CellSet unreachable;
  // Thresholds are carried for uniformity with stochastic environments; the
  // deterministic dynamics make the sets independent of alpha.
  double alpha = 0.01;
  double delta = 0.01;
  double beta = 0.01;

  // One line per row: 'P' on-policy, 'o' off-policy, 'x' unreachable, '#' wall.
  std::string to_text(const GridConfig& config) const;
};

// Raised when a policy walks off the grid or into a wall; names the cell the
// policy was in when it did.
class PolicyError : public GridError {
 public:
  PolicyError(Cell from, Cell to);
  Cell from;
  Cell to;
};

// Exact forward closure of the start cell under all action sequences.
CellSet reachable_set(const GridConfig& config);

// The cells the policy visits from the start, start and final cell included.
std::vector<Cell> on_policy_path(const GridConfig& config, const GridPolicy& policy);

StatePartition partition(const GridConfig& config, const GridPolicy& policy);

}  // namespace intervenidar::gridworld
