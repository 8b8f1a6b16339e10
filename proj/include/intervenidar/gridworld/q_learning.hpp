#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "intervenidar/gridworld/grid.hpp"

namespace intervenidar::gridworld {

struct QLearningOptions {
  int episodes = 1000;
  double epsilon = 0.5;
  double learning_rate = 0.5;
  std::uint64_t seed = 0;
};

// Q(cell, action), undiscounted. Terminal cells keep all-zero rows.
class QTable {
 public:
  explicit QTable(const GridConfig& config);

  double q(Cell c, GridAction a) const { return values_[index(c)][static_cast<int>(a)]; }
  double& q(Cell c, GridAction a) { return values_[index(c)][static_cast<int>(a)]; }
  // v(s) = max_a Q(s, a); 0 on terminal cells.
  double value(Cell c) const;
  // Lowest-index action among the maximisers.
  GridAction greedy(Cell c) const;

  const GridConfig& config() const { return config_; }

 private:
  std::size_t index(Cell c) const { return config_.index(c); }
  GridConfig config_;
  std::vector<std::array<double, kGridActionCount>> values_;
};

// Epsilon-greedy tabular Q-learning from the start cell.
QTable tabular_q_learn(const GridConfig& config, const QLearningOptions& options);

}  // namespace intervenidar::gridworld
