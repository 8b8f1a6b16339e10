#include "intervenidar/bridge/scripted.hpp"

#include <climits>
#include <deque>

#include "intervenidar/game/protocols.hpp"

namespace intervenidar::bridge {

using game::Action;
using game::Direction;
using game::GameState;
using game::TilePos;

mdp::PolicyResponse UniformRandomAgent::act(const game::ObservationSource&) {
  return {static_cast<int>(rng_.uniform_below(game::kActionCount)), {}, {}, {}};
}

namespace {

// Enemy motion never depends on the player, so future positions are exact.
// `plan` holds, per step offset t in [0, horizon], which tiles are reachable
// at that time and from which of them the player can still survive to the
// horizon.
struct SpaceTimePlan {
  int horizon = 0;
  std::vector<std::vector<TilePos>> enemies;   // [t][enemy]
  std::vector<std::vector<char>> alive;        // [t][tile index]
};

bool collides(const SpaceTimePlan& plan, int t, TilePos from, TilePos to) {
  const auto& before = plan.enemies[t - 1];
  const auto& after = plan.enemies[t];
  for (std::size_t i = 0; i < after.size(); ++i)
    if (to == after[i] || (to == before[i] && after[i] == from)) return true;
  return false;
}

template <typename Fn>
void for_each_move(const game::Board& board, TilePos p, Fn&& fn) {
  fn(Action::kNoop, p);
  for (Direction d : game::kDirections) {
    const TilePos q = game::neighbor(p, d);
    if (board.is_track(q)) fn(game::direction_action(d), q);
  }
}

SpaceTimePlan make_plan(const GameState& s, int horizon) {
  const auto& board = *s.board;
  SpaceTimePlan plan;
  plan.horizon = horizon;
  std::vector<game::EntityState> enemies = s.enemies;
  plan.enemies.reserve(horizon + 1);
  for (int t = 0; t <= horizon; ++t) {
    if (t > 0)
      for (auto& e : enemies) e = game::enemy_advance(e, board, *s.config, s.step + t);
    std::vector<TilePos> at;
    for (const auto& e : enemies) at.push_back(e.position);
    plan.enemies.push_back(std::move(at));
  }

  const std::size_t n = board.tile_count();
  std::vector<std::vector<char>> reach(horizon + 1, std::vector<char>(n, 0));
  reach[0][board.index(s.player.position)] = 1;
  for (int t = 1; t <= horizon; ++t)
    for (std::size_t i = 0; i < n; ++i) {
      if (!reach[t - 1][i]) continue;
      const TilePos p = board.position(i);
      for_each_move(board, p, [&](Action, TilePos q) {
        if (!collides(plan, t, p, q)) reach[t][board.index(q)] = 1;
      });
    }

  plan.alive = reach;
  for (int t = horizon - 1; t >= 0; --t)
    for (std::size_t i = 0; i < n; ++i) {
      if (!reach[t][i]) continue;
      const TilePos p = board.position(i);
      bool ok = false;
      for_each_move(board, p, [&](Action, TilePos q) {
        if (!ok && plan.alive[t + 1][board.index(q)] && !collides(plan, t + 1, p, q)) ok = true;
      });
      plan.alive[t][i] = ok;
    }
  return plan;
}

}  // namespace

mdp::PolicyResponse GreedyPainterAgent::act(const game::ObservationSource& view) {
  if (options_.wander > 0.0 && rng_.uniform01() < options_.wander) {
    const GameState& s = view.latent();
    const SpaceTimePlan plan = make_plan(s, options_.horizon);
    std::vector<int> safe;
    for_each_move(*s.board, s.player.position, [&](Action a, TilePos q) {
      if (plan.alive[1][s.board->index(q)] && !collides(plan, 1, s.player.position, q))
        safe.push_back(static_cast<int>(a));
    });
    if (!safe.empty()) return {safe[rng_.uniform_below(safe.size())], {}, {}, {}};
  }
  return {static_cast<int>(choose(view.latent())), {}, {}, {}};
}

Action GreedyPainterAgent::choose(const GameState& s) const {
  const auto& board = *s.board;
  const TilePos me = s.player.position;
  const SpaceTimePlan plan = make_plan(s, options_.horizon);

  // Standing still paints nothing, so the current tile is never a target.
  auto wanted = [&](TilePos p) {
    if (p == me || s.is_painted(p)) return false;
    for (int id : board.segments_at(p))
      if (!s.segment_filled(id)) return true;
    return false;
  };

  // Breadth-first over (tile, time) restricted to survivable states; the
  // first wanted tile found is the earliest one the player can paint safely.
  const std::size_t n = board.tile_count();
  std::vector<int> first(n, -1);
  std::vector<int> next_first(n, -1);
  std::vector<std::size_t> layer{board.index(me)};
  std::vector<int> deepest_move;
  for (int t = 1; t <= plan.horizon && !layer.empty(); ++t) {
    std::fill(next_first.begin(), next_first.end(), -1);
    std::vector<std::size_t> next_layer;
    for (std::size_t i : layer) {
      const TilePos p = board.position(i);
      for_each_move(board, p, [&](Action a, TilePos q) {
        const std::size_t j = board.index(q);
        if (next_first[j] != -1 || !plan.alive[t][j] || collides(plan, t, p, q)) return;
        next_first[j] = t == 1 ? static_cast<int>(a) : first[i];
        next_layer.push_back(j);
      });
    }
    for (std::size_t j : next_layer)
      if (wanted(board.position(j))) return static_cast<Action>(next_first[j]);
    std::swap(first, next_first);
    layer = std::move(next_layer);
    if (!layer.empty()) deepest_move = {first[layer.front()]};
  }
  if (!deepest_move.empty()) {
    // Nothing paintable within the horizon: head toward the closest wanted
    // tile by track distance among the moves that keep the player alive.
    const auto dist = [&] {
      std::vector<int> best(n, INT_MAX);
      std::deque<TilePos> q;
      for (std::size_t i = 0; i < n; ++i)
        if (board.is_track(board.position(i)) && wanted(board.position(i))) {
          best[i] = 0;
          q.push_back(board.position(i));
        }
      while (!q.empty()) {
        const TilePos p = q.front();
        q.pop_front();
        for (Direction d : game::kDirections) {
          const TilePos r = game::neighbor(p, d);
          if (board.is_track(r) && best[board.index(r)] == INT_MAX) {
            best[board.index(r)] = best[board.index(p)] + 1;
            q.push_back(r);
          }
        }
      }
      return best;
    }();
    Action best = static_cast<Action>(deepest_move.front());
    int best_d = INT_MAX;
    for_each_move(board, me, [&](Action a, TilePos q) {
      if (!plan.alive[1][board.index(q)] || collides(plan, 1, me, q)) return;
      if (dist[board.index(q)] < best_d) {
        best_d = dist[board.index(q)];
        best = a;
      }
    });
    return best;
  }

  // Every continuation dies within the horizon: maximise distance to the
  // closest enemy after the move.
  Action best = Action::kNoop;
  int best_score = INT_MIN;
  for_each_move(board, me, [&](Action a, TilePos q) {
    if (collides(plan, 1, me, q)) return;
    int closest = INT_MAX;
    for (TilePos e : plan.enemies[1]) closest = std::min(closest, game::manhattan(q, e));
    if (closest > best_score) {
      best_score = closest;
      best = a;
    }
  });
  return best;
}

}  // namespace intervenidar::bridge
