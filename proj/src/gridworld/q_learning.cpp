#include "intervenidar/gridworld/q_learning.hpp"

#include <algorithm>

#include "intervenidar/mdp/rng.hpp"

namespace intervenidar::gridworld {

QTable::QTable(const GridConfig& config) : config_(config), values_(config.cell_count()) {
  for (auto& row : values_) row.fill(0.0);
}

double QTable::value(Cell c) const {
  if (config_.terminal(c)) return 0.0;
  const auto& row = values_[index(c)];
  return *std::max_element(row.begin(), row.end());
}

GridAction QTable::greedy(Cell c) const {
  const auto& row = values_[index(c)];
  int best = 0;
  for (int a = 1; a < kGridActionCount; ++a)
    if (row[a] > row[best]) best = a;
  return static_cast<GridAction>(best);
}

QTable tabular_q_learn(const GridConfig& config, const QLearningOptions& options) {
  if (options.episodes < 1) throw GridError("tabular_q_learn: episodes must be >= 1");
  QTable table(config);
  GridWorldEnv env(config);
  auto rng = mdp::Rng::derived(options.seed, "agent");
  for (int episode = 0; episode < options.episodes; ++episode) {
    env.reset();
    while (!env.terminal()) {
      const Cell s = env.cell();
      const GridAction a = rng.uniform01() < options.epsilon
                               ? static_cast<GridAction>(rng.uniform_below(kGridActionCount))
                               : table.greedy(s);
      const auto result = env.step(static_cast<int>(a));
      // Crashes and terminal cells contribute no future value.
      const double future = result.terminal ? 0.0 : table.value(result.next_state);
      double& q = table.q(s, a);
      q += options.learning_rate * (result.reward + future - q);
    }
  }
  return table;
}

}  // namespace intervenidar::gridworld
