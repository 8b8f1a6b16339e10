#include "intervenidar/interventions/interventions.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

#include "intervenidar/game/protocols.hpp"
#include "intervenidar/mdp/rng.hpp"

namespace intervenidar::interventions {

using game::Board;
using game::GameState;
using game::TilePos;
using nlohmann::json;

namespace {

struct KindName {
  Kind kind;
  const char* short_name;
  const char* long_name;
};

constexpr KindName kKindNames[] = {
    {Kind::kEnemyRemoval, "ER", "enemy-removal"},
    {Kind::kEnemyShift, "ES", "enemy-shift"},
    {Kind::kAddLineSegment, "ALS", "add-line-segment"},
    {Kind::kFillLineSegments, "FLS", "fill-line-segments"},
    {Kind::kPlayerRandomStart, "PRS", "player-random-start"},
};

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

json pos_json(TilePos p) { return json::array({p.x, p.y}); }

}  // namespace

std::string to_string(Kind kind) {
  for (const auto& k : kKindNames)
    if (k.kind == kind) return k.short_name;
  throw InterventionError("unknown intervention kind");
}

Kind kind_from_string(const std::string& s) {
  const std::string l = lower(s);
  for (const auto& k : kKindNames)
    if (l == lower(k.short_name) || l == k.long_name) return k.kind;
  throw InterventionError("unknown intervention kind '" + s + "' (expected ER, ES, ALS, FLS or PRS)");
}

void Intervention::validate() const {
  switch (kind) {
    case Kind::kEnemyRemoval:
      if (count < kMinRemovals || count > kMaxRemovals)
        throw InterventionError("ER: removal count " + std::to_string(count) + " outside [1, 4]");
      break;
    case Kind::kEnemyShift:
      if (shift < kMinShift || shift > kMaxShift)
        throw InterventionError("ES: shift " + std::to_string(shift) + " outside [1, 20]");
      break;
    case Kind::kFillLineSegments:
      if (count < kMinFills || count > kMaxFills)
        throw InterventionError("FLS: segment count " + std::to_string(count) + " outside [1, 4]");
      break;
    case Kind::kAddLineSegment:
    case Kind::kPlayerRandomStart:
      break;
  }
}

json Intervention::to_json() const {
  json j = {{"kind", to_string(kind)}, {"seed", seed}};
  if (kind == Kind::kEnemyRemoval || kind == Kind::kFillLineSegments) j["count"] = count;
  if (kind == Kind::kEnemyShift) j["shift"] = shift;
  return j;
}

Intervention Intervention::from_json(const json& j) {
  try {
    Intervention iv;
    iv.kind = kind_from_string(j.at("kind").get<std::string>());
    iv.seed = j.value("seed", std::uint64_t{0});
    iv.count = j.value("count", 1);
    iv.shift = j.value("shift", 1);
    iv.validate();
    return iv;
  } catch (const json::exception& e) {
    throw FormatError(std::string("intervention: ") + e.what());
  }
}

json InterventionReport::to_json() const {
  return {{"intervention", intervention.to_json()},
          {"resolved", resolved},
          {"pre_digest", pre_digest.hex()},
          {"post_digest", post_digest.hex()},
          {"checks", checks}};
}

Intervention sample_condition(Kind kind, std::uint64_t seed, const game::GameConfig&) {
  auto rng = mdp::Rng::derived(seed, "intervention-params");
  Intervention iv;
  iv.kind = kind;
  iv.seed = seed;
  switch (kind) {
    case Kind::kEnemyRemoval: iv.count = rng.uniform_int(kMinRemovals, kMaxRemovals); break;
    case Kind::kEnemyShift: iv.shift = rng.uniform_int(kMinShift, kMaxShift); break;
    case Kind::kFillLineSegments: iv.count = rng.uniform_int(kMinFills, kMaxFills); break;
    case Kind::kAddLineSegment:
    case Kind::kPlayerRandomStart: break;
  }
  return iv;
}

std::vector<Placement> als_candidates(const Board& board) {
  auto horizontal = [&](TilePos p) {
    return board.is_track({p.x - 1, p.y}) || board.is_track({p.x + 1, p.y});
  };
  std::vector<Placement> out;
  for (int x = 0; x < board.width(); ++x) {
    for (int top = 0; top < board.height(); ++top) {
      if (!board.is_intersection({x, top}) || !horizontal({x, top})) continue;
      int y = top + 1;
      bool clear = true;
      while (y < board.height() && !board.is_track({x, y})) {
        if (board.is_track({x - 1, y}) || board.is_track({x + 1, y})) clear = false;
        ++y;
      }
      if (!clear || y >= board.height() || y - top < 2) continue;
      if (!board.is_intersection({x, y}) || !horizontal({x, y})) continue;
      out.push_back({x, top, y});
    }
  }
  return out;
}

namespace {

void apply_removal(GameState& s, const Intervention& iv, mdp::Rng& rng, json& resolved) {
  const int n = static_cast<int>(s.enemies.size());
  if (iv.count > n) {
    throw InfeasibleError("ER: cannot remove " + std::to_string(iv.count) + " enemies from a board with " +
                          std::to_string(n));
  }
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span<int>(order));
  std::vector<int> removed(order.begin(), order.begin() + iv.count);
  std::sort(removed.begin(), removed.end());
  std::vector<game::EntityState> kept;
  for (int i = 0; i < n; ++i)
    if (!std::binary_search(removed.begin(), removed.end(), i)) kept.push_back(s.enemies[i]);
  s.enemies = std::move(kept);
  resolved["removed"] = removed;
}

game::EntityState shifted(const game::EntityState& enemy, const GameState& s, int n) {
  if (auto* lookup = std::get_if<game::LookupState>(&enemy.protocol)) {
    game::EntityState e = enemy;
    const auto tables = game::ordered_tables(*s.config);
    const auto length = tables.at(static_cast<std::size_t>(lookup->table))->size();
    auto& ls = std::get<game::LookupState>(e.protocol);
    ls.phase = static_cast<std::uint32_t>((lookup->phase + static_cast<std::uint64_t>(n)) % length);
    e.position = game::lookup_position(ls, *s.config, s.step);
    return e;
  }
  game::EntityState e = enemy;
  for (int i = 1; i <= n; ++i) e = game::enemy_advance(e, *s.board, *s.config, s.step + i);
  return e;
}

void apply_shift(GameState& s, const Intervention& iv, mdp::Rng& rng, json& resolved) {
  // Enemies whose shifted position would land on the player are not eligible:
  // that start state would be a loss before the first move.
  std::vector<std::pair<int, game::EntityState>> eligible;
  for (std::size_t i = 0; i < s.enemies.size(); ++i) {
    auto e = shifted(s.enemies[i], s, iv.shift);
    if (e.position != s.player.position) eligible.emplace_back(static_cast<int>(i), std::move(e));
  }
  if (eligible.empty()) throw InfeasibleError("ES: no enemy can be shifted without landing on the player");
  auto& [index, enemy] = eligible[rng.uniform_below(eligible.size())];
  resolved["enemy"] = index;
  resolved["from"] = pos_json(s.enemies[index].position);
  resolved["to"] = pos_json(enemy.position);
  s.enemies[index] = enemy;
}

void apply_add_segment(GameState& s, mdp::Rng& rng, json& resolved) {
  const auto candidates = als_candidates(*s.board);
  if (candidates.empty()) throw InfeasibleError("ALS: no valid location for a new vertical segment");
  const Placement p = candidates[rng.uniform_below(candidates.size())];
  const std::size_t before = s.board->segments().size();
  auto board = std::make_shared<const Board>(s.board->with_vertical_segment(p.column, p.top, p.bottom));
  if (board->segments().size() != before + 1) {
    throw InterventionError("ALS: placement changed the segment count by more than one");
  }
  s.board = std::move(board);
  s.filled.assign(s.board->segments().size(), 0);
  game::refresh_filled(s);
  s.score = s.filled_count();
  resolved["column"] = p.column;
  resolved["top"] = p.top;
  resolved["bottom"] = p.bottom;
  resolved["candidates"] = candidates.size();
}

bool fill_search(const GameState& s, const std::vector<int>& pool, std::size_t from, int k,
                 std::vector<int>& chosen) {
  const auto& segs = s.board->segments();
  if (static_cast<int>(chosen.size()) == k) {
    // Painting the chosen segments must not complete any other segment.
    GameState probe = s;
    for (int id : chosen)
      for (TilePos t : segs[id].tiles) probe.painted[probe.board->index(t)] = 1;
    const auto newly = game::refresh_filled(probe);
    return static_cast<int>(newly.size()) == k && probe.filled_count() < static_cast<int>(segs.size());
  }
  for (std::size_t i = from; i < pool.size(); ++i) {
    const auto& candidate = segs[pool[i]];
    const bool clash = std::any_of(chosen.begin(), chosen.end(),
                                   [&](int id) { return segs[id].shares_endpoint(candidate); });
    if (clash) continue;
    chosen.push_back(pool[i]);
    if (fill_search(s, pool, i + 1, k, chosen)) return true;
    chosen.pop_back();
  }
  return false;
}

void apply_fill(GameState& s, const Intervention& iv, mdp::Rng& rng, json& resolved) {
  std::vector<int> pool;
  for (const auto& seg : s.board->segments())
    if (!s.segment_filled(seg.id)) pool.push_back(seg.id);
  rng.shuffle(std::span<int>(pool));
  std::vector<int> chosen;
  if (!fill_search(s, pool, 0, iv.count, chosen)) {
    throw InfeasibleError("FLS: fewer than " + std::to_string(iv.count) +
                          " pairwise non-adjacent unfilled segments are available");
  }
  for (int id : chosen)
    for (TilePos t : s.board->segments()[id].tiles) s.painted[s.board->index(t)] = 1;
  game::refresh_filled(s);
  s.score = s.filled_count();
  std::sort(chosen.begin(), chosen.end());
  resolved["segments"] = chosen;
}

bool buffered(TilePos p, const GameState& s) {
  return std::all_of(s.enemies.begin(), s.enemies.end(),
                     [&](const auto& e) { return game::chebyshev(p, e.position) >= kPlayerBuffer; });
}

void apply_player_start(GameState& s, mdp::Rng& rng, json& resolved) {
  std::vector<TilePos> candidates;
  const Board& board = *s.board;
  for (std::size_t i = 0; i < board.tile_count(); ++i) {
    const TilePos p = board.position(i);
    if (board.is_track(p) && p != s.player.position && buffered(p, s)) candidates.push_back(p);
  }
  if (candidates.empty()) throw InfeasibleError("PRS: no track tile keeps the required buffer from every enemy");
  const TilePos p = candidates[rng.uniform_below(candidates.size())];
  resolved["from"] = pos_json(s.player.position);
  resolved["to"] = pos_json(p);
  s.player.position = p;
}

}  // namespace

Applied apply(const GameState& state, const Intervention& iv) {
  iv.validate();
  if (state.step != 0) {
    throw InterventionError("interventions apply to start states only (state is at step " +
                            std::to_string(state.step) + ")");
  }
  if (state.terminal) throw InterventionError("interventions cannot be applied to a terminal state");

  Applied out{state, {}};
  GameState& s = out.state;
  auto& report = out.report;
  report.intervention = iv;
  report.pre_digest = game::latent_digest(state);
  auto rng = mdp::Rng::derived(iv.seed, "intervention");

  switch (iv.kind) {
    case Kind::kEnemyRemoval: apply_removal(s, iv, rng, report.resolved); break;
    case Kind::kEnemyShift: apply_shift(s, iv, rng, report.resolved); break;
    case Kind::kAddLineSegment: apply_add_segment(s, rng, report.resolved); break;
    case Kind::kFillLineSegments: apply_fill(s, iv, rng, report.resolved); break;
    case Kind::kPlayerRandomStart: apply_player_start(s, rng, report.resolved); break;
  }

  // Re-check the result independently of how it was built.
  auto require = [&](bool ok, const std::string& name) {
    if (!ok) throw InterventionError(to_string(iv.kind) + ": post-condition '" + name + "' violated");
    report.checks.push_back(name);
  };
  const auto violations = state_violations(s);
  require(violations.empty(), violations.empty() ? "state-valid" : violations.front());
  switch (iv.kind) {
    case Kind::kEnemyRemoval:
      require(state.enemies.size() - s.enemies.size() == static_cast<std::size_t>(iv.count), "removed-count");
      break;
    case Kind::kEnemyShift:
      require(s.enemies.size() == state.enemies.size(), "enemy-count-unchanged");
      break;
    case Kind::kAddLineSegment:
      require(s.board->segments().size() == state.board->segments().size() + 1, "one-segment-added");
      break;
    case Kind::kFillLineSegments: {
      require(s.filled_count() - state.filled_count() == iv.count, "filled-count");
      const auto ids = report.resolved["segments"].get<std::vector<int>>();
      bool apart = true;
      for (std::size_t i = 0; i < ids.size(); ++i)
        for (std::size_t j = i + 1; j < ids.size(); ++j)
          if (s.board->segments()[ids[i]].shares_endpoint(s.board->segments()[ids[j]])) apart = false;
      require(apart, "pairwise-non-adjacent");
      break;
    }
    case Kind::kPlayerRandomStart:
      require(buffered(s.player.position, s), "player-buffer");
      break;
  }
  report.post_digest = game::latent_digest(s);
  require(report.post_digest != report.pre_digest, "state-changed");
  return out;
}

std::vector<std::string> state_violations(const GameState& s) {
  std::vector<std::string> v;
  const Board& board = *s.board;
  try {
    (void)Board::from_rows(board.rows());
  } catch (const game::BoardError& e) {
    v.push_back(std::string("board invalid: ") + e.what());
  }
  if (s.painted.size() != board.tile_count()) v.push_back("paint map has the wrong size");
  if (s.filled.size() != board.segments().size()) v.push_back("fill flags have the wrong size");
  if (!v.empty()) return v;

  if (!board.is_track(s.player.position)) v.push_back("player is off track");
  for (std::size_t i = 0; i < s.enemies.size(); ++i) {
    const auto& e = s.enemies[i];
    if (!board.is_track(e.position)) v.push_back("enemy " + std::to_string(i) + " is off track");
    if (e.position == s.player.position && !s.dead) v.push_back("enemy " + std::to_string(i) + " is on the player");
    if (const auto* ls = std::get_if<game::LookupState>(&e.protocol)) {
      const std::uint64_t time = s.won ? s.step - 1 : s.step;
      if (game::lookup_position(*ls, *s.config, time) != e.position)
        v.push_back("enemy " + std::to_string(i) + " is not where its table puts it");
    }
  }
  for (std::size_t i = 0; i < board.tile_count(); ++i)
    if (s.painted[i] && !board.is_track(board.position(i))) v.push_back("paint off track");
  for (const auto& seg : board.segments()) {
    const bool all = std::all_of(seg.tiles.begin(), seg.tiles.end(), [&](TilePos t) { return s.is_painted(t); });
    if (all != s.segment_filled(seg.id)) v.push_back("segment " + std::to_string(seg.id) + " fill flag inconsistent");
  }
  if (s.score != s.filled_count()) v.push_back("score differs from filled segment count");
  return v;
}

}  // namespace intervenidar::interventions
