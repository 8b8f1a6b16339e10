// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include "../oracles/oracles.hpp"
#include "intervenidar/bridge/remote.hpp"
#include "intervenidar/bridge/scripted.hpp"
#include "intervenidar/bridge/transport.hpp"
#include "intervenidar/eval/distance.hpp"
#include "intervenidar/eval/metrics.hpp"
#include "intervenidar/game/env.hpp"
#include "intervenidar/gridworld/partition.hpp"
#include "intervenidar/gridworld/q_learning.hpp"
#include "intervenidar/interventions/interventions.hpp"
#include "intervenidar/mdp/episode.hpp"
#include "intervenidar/mdp/rng.hpp"
#include "intervenidar/stategen/state_gen.hpp"

namespace fs = std::filesystem;
using namespace intervenidar;
using Clock = std::chrono::steady_clock;

namespace {

const fs::path kDataDir = INTERVENIDAR_DATA_DIR;
const fs::path kGoldenDir = INTERVENIDAR_GOLDEN_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

// Runs one criterion; `limit_s` <= 0 means no time limit.
void criterion(const std::string& name, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  if (limit_s > 0 && secs >= limit_s) {
    o.pass = false;
    o.detail += "; exceeded the " + std::to_string(static_cast<int>(limit_s)) + " s limit";
  }
  std::ostringstream line;
  line.setf(std::ios::fixed);
  line.precision(2);
  line << (o.pass ? "PASS" : "FAIL") << "  " << name << " — " << o.detail << " (" << secs << " s)";
  std::cout << line.str() << std::endl;
  if (!o.pass) ++failures;
}

game::ConfigPtr default_config() {
  static const auto c = game::load_config(kDataDir / "boards/default.json");
  return c;
}

game::ConfigPtr enemy_free_config() {
  static const auto c = [] {
    game::GameConfig g = *default_config();
    g.name = "default-no-enemies";
    g.enemies.clear();
    g.lookup_tables.clear();
    g.cached_hash.clear();
    return game::make_config(std::move(g));
  }();
  return c;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ------------------------------------------------------------------ GridWorld

using gridworld::Cell;
using gridworld::GridAction;
using gridworld::GridConfig;

GridConfig random_grid(mdp::Rng& rng) {
  const int w = rng.uniform_int(1, 8);
  const int h = rng.uniform_int(1, 8);
  const Cell start{rng.uniform_int(0, w - 1), rng.uniform_int(0, h - 1)};
  const Cell goal{rng.uniform_int(0, w - 1), rng.uniform_int(0, h - 1)};
  auto g = GridConfig::empty(w, h, start, goal);
  const double density = rng.uniform01() * 0.4;
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      const Cell cell{c, r};
      if (cell != start && cell != goal && rng.uniform01() < density) g.set_wall(cell);
    }
  return g;
}

Outcome gridworld_partition() {
  mdp::Rng rng(20241015);
  int checked = 0, rejected = 0, mismatches = 0;
  const std::array<int, 3> drow{0, -1, 1};
  for (int attempt = 0; checked < 200 && attempt < 5000; ++attempt) {
    const auto g = random_grid(rng);
    const auto reach = oracle::reachable_by_enumeration(g);
    // Policy: a fixed per-cell choice among the moves that stay on the grid.
    const std::uint64_t salt = rng.next_u64();
    const gridworld::GridPolicy policy = [&g, salt](Cell c) {
      std::vector<GridAction> ok;
      for (int a = 0; a < 3; ++a)
        if (oracle::open_cell(g, c.col + 1, c.row + std::array<int, 3>{0, -1, 1}[a])) ok.push_back(static_cast<GridAction>(a));
      if (ok.empty()) return GridAction::kRight;
      const auto h = mdp::derive_seed(salt, std::to_string(c.col) + "," + std::to_string(c.row));
      return ok[h % ok.size()];
    };
    // Oracle path.
    std::set<std::pair<int, int>> path{{g.start.col, g.start.row}};
    int col = g.start.col, row = g.start.row;
    bool boxed_in = false;
    while (!oracle::terminal_cell(g, col, row)) {
      const int dr = drow[static_cast<int>(policy({col, row}))];
      if (!oracle::open_cell(g, col + 1, row + dr)) {
        boxed_in = true;
        break;
      }
      ++col;
      row += dr;
      path.insert({col, row});
    }
    if (boxed_in) {
      try {
        gridworld::partition(g, policy);
        ++mismatches;  // must be rejected
      } catch (const gridworld::PolicyError&) {
        ++rejected;
      }
      continue;
    }
    const auto p = gridworld::partition(g, policy);
    std::set<std::pair<int, int>> on, off, unreach, want_off, want_unreach;
    for (const auto& c : p.on_policy) on.insert({c.col, c.row});
    for (const auto& c : p.off_policy) off.insert({c.col, c.row});
    for (const auto& c : p.unreachable) unreach.insert({c.col, c.row});
    for (int r = 0; r < g.height; ++r)
      for (int c = 0; c < g.width; ++c) {
        if (!oracle::open_cell(g, c, r)) continue;
        if (!reach.count({c, r}))
          want_unreach.insert({c, r});
        else if (!path.count({c, r}))
          want_off.insert({c, r});
      }
    if (on != path || off != want_off || unreach != want_unreach) ++mismatches;
    ++checked;
  }
  return {checked >= 100 && mismatches == 0,
          std::to_string(checked) + " random grids up to 8x8 partitioned, " + std::to_string(mismatches) +
              " mismatches vs enumeration (" + std::to_string(rejected) + " boxed-in policies correctly rejected)"};
}

Outcome tabular_convergence() {
  const auto g = GridConfig::load(kDataDir / "gridworld/figure_replica.txt");
  const auto q = gridworld::tabular_q_learn(g, {20000, 0.9, 0.5, 11});
  const auto v = oracle::value_iteration(g);
  double worst = 0;
  const auto reach = gridworld::reachable_set(g);
  for (const auto& c : reach) worst = std::max(worst, std::abs(q.value(c) - v[g.index(c)]));
  std::ostringstream d;
  d << reach.size() << " reachable states, max |v_hat - v*| = " << worst << " (epsilon 0.9, 20000 episodes)";
  return {worst < 1e-6, d.str()};
}

// ------------------------------------------------------------------ game

Outcome determinism() {
  const auto config = default_config();
  std::set<std::string> unique;
  int divergences = 0;
  std::size_t length = 0;
  for (int run = 0; run < 10; ++run) {
    game::IntervenidarEnv env(config);
    env.reset(3);
    bridge::UniformRandomAgent agent;
    bridge::AgentPolicy policy(agent);
    const auto t = mdp::run_episode(env, policy, {3, 5000, "control"});
    length = t.steps.size();
    unique.insert(mdp::to_text(t));
    game::IntervenidarEnv check(config);
    check.reset(3);
    if (!mdp::replay(t, check).exact()) ++divergences;
  }
  return {unique.size() == 1 && divergences == 0 && length == 5000,
          "10 runs of " + std::to_string(length) + " steps, " + std::to_string(unique.size()) +
              " unique trajectory byte sequence(s), " + std::to_string(divergences) + " replay divergences"};
}

Outcome default_board() {
  const auto config = default_config();
  const auto s = game::new_game(config);
  const auto segments = config->board.segments().size();
  const int oracle_segments = oracle::count_segments(config->board.rows());
  game::IntervenidarEnv env(enemy_free_config());
  env.reset(0);
  bridge::GreedyPainterAgent painter;
  bridge::AgentPolicy policy(painter);
  const auto t = mdp::run_episode(env, policy, {0, 20000, "control"});
  const auto& end = env.state();
  const bool ok = segments == 88 && oracle_segments == 88 && s.enemies.size() == 5 && end.won && !end.dead &&
                  end.filled_count() == 88;
  return {ok, std::to_string(segments) + " segments (independent count " + std::to_string(oracle_segments) + "), " +
                  std::to_string(s.enemies.size()) + " enemies; enemy-free greedy painter: " +
                  std::to_string(end.filled_count()) + " filled, won=" + (end.won ? "true" : "false") + " after " +
                  std::to_string(t.steps.size()) + " steps"};
}

// ------------------------------------------------------------------ interventions

using interventions::Kind;

bool board_valid(const game::Board& b) {
  try {
    game::Board::from_rows(b.rows());
    return true;
  } catch (const Error&) {
    return false;
  }
}

struct InterventionSweep {
  std::map<Kind, int> applied, infeasible, violations, unreachable_proved;
  std::map<Kind, std::string> first_problem;
  int samples_per_kind = 10000;
};

InterventionSweep& sweep() {
  static InterventionSweep s;
  return s;
}

Outcome intervention_constraints() {
  auto& sw = sweep();
  const auto config = default_config();
  const auto base = game::new_game(config);
  const auto& old_board = *base.board;
  const auto& segs = old_board.segments();
  const int old_segments = oracle::count_segments(old_board.rows());
  // ES oracle: the unmodified game with a stationary player, t ticks later.
  std::vector<game::GameState> shifted{base};
  for (int t = 1; t <= interventions::kMaxShift; ++t) {
    auto next = shifted.back();
    game::step_in_place(next, game::Action::kNoop);
    shifted.push_back(next);
  }

  for (Kind kind : interventions::kAllKinds) {
    for (int i = 0; i < sw.samples_per_kind; ++i) {
      const auto seed = static_cast<std::uint64_t>(i);
      const auto iv = interventions::sample_condition(kind, seed, *config);
      interventions::Applied a;
      try {
        a = interventions::apply(base, iv);
      } catch (const interventions::InfeasibleError&) {
        ++sw.infeasible[kind];
        continue;
      }
      ++sw.applied[kind];
      std::string problem;
      const auto& st = a.state;
      const auto& r = a.report.resolved;
      switch (kind) {
        case Kind::kEnemyRemoval: {
          const int k = iv.count;
          const auto removed = r.at("removed").get<std::vector<int>>();
          if (k < 1 || k > 4) problem = "count out of range";
          else if (std::set<int>(removed.begin(), removed.end()).size() != static_cast<std::size_t>(k))
            problem = "removed set has the wrong size";
          else if (st.enemies.size() + static_cast<std::size_t>(k) != base.enemies.size())
            problem = "enemy count not reduced by count";
          break;
        }
        case Kind::kEnemyShift: {
          const int n = iv.shift;
          const auto e = static_cast<std::size_t>(r.at("enemy").get<int>());
          if (n < 1 || n > 20) problem = "shift out of range";
          else if (st.enemies[e].position != shifted[static_cast<std::size_t>(n)].enemies[e].position)
            problem = "shifted enemy is not where the game puts it after " + std::to_string(n) + " ticks";
          else
            for (std::size_t j = 0; j < base.enemies.size(); ++j)
              if (j != e && st.enemies[j] != base.enemies[j]) problem = "another enemy moved";
          break;
        }
        case Kind::kAddLineSegment: {
          const int col = r.at("column").get<int>(), top = r.at("top").get<int>(), bottom = r.at("bottom").get<int>();
          const auto& nb = *st.board;
          int changed = 0;
          bool outside = false;
          for (int y = 0; y < nb.height(); ++y)
            for (int x = 0; x < nb.width(); ++x)
              if (old_board.is_track({x, y}) != nb.is_track({x, y})) {
                ++changed;
                if (x != col || y <= top || y >= bottom) outside = true;
              }
          bool has_vertical = false;
          for (const auto& s : nb.segments())
            if (s.orientation == game::Orientation::kVertical && s.first == game::TilePos{col, top} &&
                s.last == game::TilePos{col, bottom})
              has_vertical = true;
          if (oracle::count_segments(nb.rows()) != old_segments + 1 || nb.segments().size() != segs.size() + 1)
            problem = "segment count did not grow by exactly one";
          else if (!old_board.is_track({col, top}) || !old_board.is_track({col, bottom}))
            problem = "endpoint not on existing track";
          else if (outside || changed != bottom - top - 1)
            problem = "tiles changed outside the new run";
          else if (!has_vertical)
            problem = "no vertical segment between the endpoints";
          break;
        }
        case Kind::kFillLineSegments: {
          const int k = iv.count;
          const auto ids = r.at("segments").get<std::vector<int>>();
          if (k < 1 || k > 4 || static_cast<int>(ids.size()) != k) problem = "count out of range";
          for (std::size_t x = 0; x < ids.size() && problem.empty(); ++x) {
            if (base.segment_filled(ids[x])) problem = "segment was already filled";
            for (std::size_t y = x + 1; y < ids.size(); ++y) {
              const auto& p = segs[static_cast<std::size_t>(ids[x])];
              const auto& q = segs[static_cast<std::size_t>(ids[y])];
              for (auto e1 : {p.first, p.last})
                for (auto e2 : {q.first, q.last})
                  if (e1 == e2) problem = "adjacent segments filled";
            }
          }
          if (problem.empty() && st.filled_count() != k) problem = "filled count differs from count";
          break;
        }
        case Kind::kPlayerRandomStart: {
          const auto p = st.player.position;
          if (!st.board->is_track(p)) problem = "player off track";
          for (const auto& e : st.enemies)
            if (oracle::chebyshev(p.x, p.y, e.position.x, e.position.y) < 2)
              problem = "enemy within one tile of the player";
          break;
        }
      }
      if (problem.empty() && !board_valid(*st.board)) problem = "board no longer valid";
      if (problem.empty()) {
        const auto v = interventions::state_violations(st);
        if (!v.empty()) problem = v.front();
      }
      if (!problem.empty()) {
        ++sw.violations[kind];
        if (!sw.first_problem.count(kind)) sw.first_problem[kind] = "seed " + std::to_string(seed) + ": " + problem;
      }
      if (kind == Kind::kAddLineSegment || kind == Kind::kFillLineSegments ||
          (kind == Kind::kPlayerRandomStart && st.player.position != base.player.position)) {
        const auto verdict = interventions::verify_unreachable(st, *config);
        if (verdict.unreachable && !verdict.justification.empty() && verdict.justification != "unknown")
          ++sw.unreachable_proved[kind];
      }
    }
  }
  int total_violations = 0;
  std::ostringstream d;
  d << sw.samples_per_kind << " samples per kind;";
  for (Kind kind : interventions::kAllKinds) {
    total_violations += sw.violations[kind];
    d << " " << interventions::to_string(kind) << " " << sw.applied[kind] << " applied/" << sw.infeasible[kind]
      << " infeasible/" << sw.violations[kind] << " violations";
    if (sw.first_problem.count(kind)) d << " [" << sw.first_problem[kind] << "]";
    d << ";";
  }
  bool enough = true;
  for (Kind kind : interventions::kAllKinds) enough = enough && sw.applied[kind] > 0;
  return {total_violations == 0 && enough, d.str()};
}

Outcome unreachability() {
  auto& sw = sweep();
  const auto config = default_config();
  std::ostringstream d;
  bool all = true;
  for (Kind kind : {Kind::kAddLineSegment, Kind::kFillLineSegments, Kind::kPlayerRandomStart}) {
    const int n = sw.applied[kind];
    all = all && n > 0 && sw.unreachable_proved[kind] == n;
    d << interventions::to_string(kind) << " " << sw.unreachable_proved[kind] << "/" << n << " proved; ";
  }
  // False positives: the unmodified starts and every state along on-policy
  // play are reachable by construction.
  int checked = 0, false_positives = 0;
  for (const auto& c : {default_config(), enemy_free_config()}) {
    ++checked;
    if (interventions::verify_unreachable(game::new_game(c), *c).unreachable) ++false_positives;
  }
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    bridge::GreedyPainterAgent wanderer({24, 0.5, "wandering-painter"});
    bridge::UniformRandomAgent random;
    for (bridge::Agent* agent : {static_cast<bridge::Agent*>(&wanderer), static_cast<bridge::Agent*>(&random)}) {
      agent->begin_episode(seed);
      game::IntervenidarEnv env(config);
      env.reset(seed);
      for (int i = 0; i < 500 && !env.terminal(); ++i) {
        env.step(agent->act(env).action);
        ++checked;
        if (interventions::verify_unreachable(env.state(), *config).unreachable) ++false_positives;
      }
    }
  }
  d << false_positives << " false positives over " << checked << " reachable states";
  return {all && false_positives == 0, d.str()};
}

// ------------------------------------------------------------------ metrics

Outcome metric_oracles() {
  mdp::Rng rng(1000);
  int tar_mismatch = 0;
  for (int i = 0; i < 1000; ++i) {
    mdp::Trajectory t;
    double hand = 0;
    const int len = rng.uniform_int(0, 300);
    for (int s = 0; s < len; ++s) {
      mdp::TrajectoryStep step;
      step.reward = static_cast<double>(rng.uniform_below(2));
      hand += step.reward;
      t.steps.push_back(step);
    }
    if (eval::tar(t) != hand) ++tar_mismatch;
  }
  // VEE stubs on one reward sequence.
  mdp::Trajectory t;
  for (int s = 0; s < 500; ++s) {
    mdp::TrajectoryStep step;
    step.reward = static_cast<double>(rng.uniform_below(2));
    t.steps.push_back(step);
  }
  auto with_offset = [&](double c) {
    double ret = 0;
    for (auto it = t.steps.rbegin(); it != t.steps.rend(); ++it) {
      ret += it->reward;
      it->value = ret + c;
    }
    return eval::vee_series(t);
  };
  const auto perfect = with_offset(0.0);
  const auto offset = with_offset(3.25);
  bool vee_ok = perfect && offset;
  if (vee_ok) {
    for (double v : *perfect) vee_ok = vee_ok && v == 0.0;
    for (double v : *offset) vee_ok = vee_ok && v == 3.25;
  }
  std::vector<eval::EvalRecord> records;
  for (int i = 0; i < 37; ++i) {
    eval::EvalRecord r;
    r.condition = "control";
    r.tar = static_cast<double>(rng.uniform_int(0, 200)) / 7.0;
    records.push_back(r);
  }
  const auto table = eval::summarize(records);
  const auto norm = table.find("control")->normalized_tar;
  const bool norm_ok = norm && *norm == 1.0;
  std::ostringstream d;
  d << tar_mismatch << "/1000 TAR mismatches; VEE stubs " << (vee_ok ? "exact (0 and c)" : "WRONG")
    << "; normalized control TAR = " << (norm ? eval::format_real(*norm) : "NA");
  return {tar_mismatch == 0 && vee_ok && norm_ok, d.str()};
}

// ------------------------------------------------------------------ state generation

Outcome off_policy_grid() {
  const auto config = default_config();
  const fs::path dir = fs::temp_directory_path() / ("intervenidar-acceptance-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  std::size_t generated = 0;
  int provenance_failures = 0;
  auto check = [&](const stategen::GeneratedState& g) {
    ++generated;
    const auto back = stategen::Provenance::from_json(g.provenance.to_json());
    if (game::latent_digest(stategen::regenerate(back, config)) != g.provenance.digest ||
        game::latent_digest(g.state) != g.provenance.digest)
      ++provenance_failures;
  };
  std::ostringstream d;

  // HS: a synthetic archive of long scripted sessions.
  stategen::HumanPlayArchive archive(dir / "archive");
  bridge::GreedyPainterAgent wanderer({24, 0.5, "wandering-painter"});
  stategen::record_sessions(archive, wanderer, "synthetic", config, 3, 42, 5000);
  const auto eligible = archive.eligible();
  for (const auto& e : eligible) {
    for (const auto& g : stategen::human_start_states(archive, e.id, stategen::kDefaultPrefixLengths, config))
      check(g);
  }
  d << "HS " << eligible.size() << " eligible sessions; ";

  // AS: the scripted agent's states, evaluated agent = random.
  for (int n : stategen::kDefaultPrefixLengths) {
    bridge::GreedyPainterAgent alt({24, 0.5, "wandering-painter"});
    check(stategen::agent_swap_state(alt, "random", config, n, static_cast<std::uint64_t>(n)));
  }

  // k-OPA for the random and the scripted agent.
  std::size_t overlap_generated = 0, overlap_hits = 0;
  for (int which = 0; which < 2; ++which) {
    auto make = [&]() -> std::unique_ptr<bridge::Agent> {
      if (which == 0) return std::make_unique<bridge::UniformRandomAgent>();
      return std::make_unique<bridge::GreedyPainterAgent>(bridge::GreedyPainterOptions{24, 0.5, "wandering-painter"});
    };
    for (int n : stategen::kDefaultPrefixLengths) {
      for (int k : stategen::kDefaultRandomActions) {
        auto agent = make();
        check(stategen::kopa_state(*agent, config, n, k, static_cast<std::uint64_t>(n * 100 + k)));
      }
      // k = 0 states lie on the agent's own trajectory.
      auto agent = make();
      const auto g = stategen::kopa_state(*agent, config, n, 0, static_cast<std::uint64_t>(n));
      check(g);
      auto replay_agent = make();
      const auto reference = stategen::on_policy_digests(*replay_agent, config, g.provenance.seed, n);
      const std::vector<mdp::Digest> one{g.provenance.digest};
      const auto audit = stategen::overlap_audit(one, reference);
      overlap_generated += audit.generated;
      overlap_hits += audit.overlapping;
    }
  }
  fs::remove_all(dir);
  const double overlap = overlap_generated ? static_cast<double>(overlap_hits) / overlap_generated : 0.0;
  d << generated << " states generated (HS, AS, k-OPA n=100..900 k in {10,20} for random and scripted agents), "
    << provenance_failures << " provenance failures; k=0 overlap " << overlap_hits << "/" << overlap_generated;
  return {!eligible.empty() && provenance_failures == 0 && overlap == 1.0, d.str()};
}

// ------------------------------------------------------------------ distances

Outcome distance_report() {
  mdp::Rng rng(64);
  auto vec = [&] {
    eval::Vector v(64);
    for (auto& x : v) x = rng.uniform01() * 2 - 1;
    return v;
  };
  std::vector<eval::Vector> evaluation, training;
  for (int i = 0; i < 100; ++i) evaluation.push_back(vec());
  for (int i = 0; i < 100; ++i) training.push_back(vec());
  const auto got = eval::nearest_distances(evaluation, training);
  const auto want = oracle::nearest_all_pairs(evaluation, training);
  double worst = 0;
  for (std::size_t i = 0; i < got.size(); ++i) worst = std::max(worst, std::abs(got[i] - want[i]));
  const auto report = eval::embedding_distance_report({{"probe", evaluation}}, training);
  bool report_ok = report.at("probe").distances.size() == 100;
  for (std::size_t i = 0; i < 100 && report_ok; ++i) report_ok = std::abs(report.at("probe").distances[i] - want[i]) <= 1e-9;
  std::ostringstream d;
  d << "100 x 64-dim vectors, max deviation from all-pairs oracle " << worst;
  return {got.size() == 100 && worst <= 1e-9 && report_ok, d.str()};
}

// ------------------------------------------------------------------ wire

Outcome wire_conformance() {
  const auto config = default_config();
  const auto text = read_file(kGoldenDir / "wire_transcript.txt");
  if (text.empty()) return {false, "golden transcript missing"};
  const auto frames = bridge::parse_transcript(text);
  const bool round_trip = bridge::write_transcript(frames) == text;

  // Replay the harness side of the transcript against a live agent.
  int reply_mismatches = 0;
  {
    auto [harness, agent_end] = bridge::stream_pair();
    std::thread server([s = std::shared_ptr<bridge::Stream>(std::move(agent_end)), config] {
      bridge::UniformRandomAgent agent;
      bridge::serve_agent(*s, agent, config);
    });
    for (const auto& f : frames) {
      if (f.outgoing)
        harness->write_all(f.bytes);
      else if (bridge::wire::encode(bridge::receive_message(*harness)) != f.bytes)
        ++reply_mismatches;
    }
    harness.reset();
    server.join();
  }

  // In-process vs over-the-wire episode.
  auto play = [&](bridge::Agent& agent) {
    game::IntervenidarEnv env(config);
    env.reset(7);
    bridge::AgentPolicy policy(agent);
    return mdp::run_episode(env, policy, {7, 2000, "control"});
  };
  bridge::UniformRandomAgent local;
  const auto direct = play(local);
  mdp::Trajectory wired;
  {
    auto [harness, agent_end] = bridge::stream_pair();
    std::thread server([s = std::shared_ptr<bridge::Stream>(std::move(agent_end)), config] {
      bridge::UniformRandomAgent agent;
      bridge::serve_agent(*s, agent, config);
    });
    {
      bridge::RemoteAgent remote(std::move(harness));
      wired = play(remote);
    }
    server.join();
  }
  const bool digests_equal = direct.final_digest == wired.final_digest && !wired.aborted;
  const bool bytes_equal = mdp::to_text(direct) == mdp::to_text(wired);
  std::ostringstream d;
  d << frames.size() << "-frame golden transcript " << (round_trip ? "round-trips" : "DOES NOT round-trip") << ", "
    << reply_mismatches << " agent reply mismatches; " << direct.steps.size() << "-step episode final digest "
    << (digests_equal ? "equal" : "DIFFERS") << " in-process vs wire (trajectory bytes "
    << (bytes_equal ? "identical" : "differ") << ")";
  return {round_trip && reply_mismatches == 0 && digests_equal && bytes_equal, d.str()};
}

}  // namespace

int main() {
  criterion("GridWorld partition equivalence", 10, gridworld_partition);
  criterion("Tabular convergence", 30, tabular_convergence);
  criterion("Determinism", 60, determinism);
  criterion("Default board structure", 0, default_board);
  criterion("Intervention constraints", 120, intervention_constraints);
  criterion("Unreachability proofs", 0, unreachability);
  criterion("Metric oracles", 0, metric_oracles);
  criterion("Off-policy generation grid", 0, off_policy_grid);
  criterion("Distance report", 0, distance_report);
  criterion("Wire-protocol conformance", 0, wire_conformance);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
