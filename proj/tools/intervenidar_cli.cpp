// intervenidar: command-line front end for the simulator, the state
// generators, the evaluation harness and the play service.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <pthread.h>
#include <signal.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "intervenidar/bridge/factory.hpp"
#include "intervenidar/bridge/remote.hpp"
#include "intervenidar/eval/experiment.hpp"
#include "intervenidar/game/env.hpp"
#include "intervenidar/game/state_io.hpp"
#include "intervenidar/gridworld/partition.hpp"
#include "intervenidar/gridworld/q_learning.hpp"
#include "intervenidar/interventions/interventions.hpp"
#include "intervenidar/mdp/episode.hpp"
#include "intervenidar/play/server.hpp"
#include "intervenidar/stategen/state_gen.hpp"

#ifndef INTERVENIDAR_VERSION
#define INTERVENIDAR_VERSION "0.0.0"
#endif
#ifndef INTERVENIDAR_DATA_DIR
#define INTERVENIDAR_DATA_DIR "data"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace intervenidar;

namespace {

// Bad flag values that CLI11 cannot see (unknown kinds, conflicting options).
class UsageError : public Error {
 public:
  using Error::Error;
};

const std::string kDefaultBoard = std::string(INTERVENIDAR_DATA_DIR) + "/boards/default.json";

json version_info() {
  return {{"name", "intervenidar"},
          {"version", INTERVENIDAR_VERSION},
          {"wire_protocol", bridge::kProtocolVersion},
          {"play_protocol", play::kPlayProtocolVersion},
          {"trajectory_format", mdp::kTrajectoryFormatVersion},
          {"builtin_agents", bridge::builtin_agent_names()}};
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

// Accepts a bare state document or the {"state": ..., "provenance": ...}
// wrapper written by `generate` and `intervene`.
game::GameState read_state(const fs::path& path, const game::ConfigPtr& config) {
  json j = read_json(path);
  if (j.contains("state")) j = j["state"];
  return game::state_from_json(j, config);
}

bridge::AgentPtr agent_from_spec(const std::string& spec, int timeout_ms) {
  bridge::AgentOptions options;
  options.timeout = bridge::Millis(timeout_ms);
  return bridge::make_agent(spec, options);
}

// ---------------------------------------------------------------- play

struct PlayArgs {
  std::string config = kDefaultBoard;
  std::string agent = "builtin:random";
  std::uint64_t seed = 0;
  int max_steps = 5000;
  std::string start_state;
  std::string output;
  int timeout_ms = 5000;
};

int cmd_play(const PlayArgs& a) {
  auto config = game::load_config(a.config);
  auto agent = agent_from_spec(a.agent, a.timeout_ms);
  game::IntervenidarEnv env(config);
  env.reset(a.seed);
  std::string label = "control";
  if (!a.start_state.empty()) {
    env.set_start_state(read_state(a.start_state, config));
    label = "custom";
  }
  bridge::AgentPolicy policy(*agent);
  auto t = mdp::run_episode(env, policy, {a.seed, a.max_steps, label});
  t.metadata["agent"] = agent->id();
  mdp::save_trajectory(t, a.output);
  std::cout << json{{"steps", t.steps.size()},
                    {"tar", t.total_reward()},
                    {"terminal", t.terminal},
                    {"won", env.state().won},
                    {"aborted", t.aborted},
                    {"output", a.output}}
                   .dump()
            << "\n";
  if (t.aborted) {
    std::cerr << "episode aborted: " << t.abort_reason << "\n";
    return 1;
  }
  return 0;
}

// ---------------------------------------------------------------- replay

int cmd_replay(const std::string& config_path, const std::string& trajectory_path, const std::string& start_state) {
  auto config = game::load_config(config_path);
  const auto t = mdp::load_trajectory(trajectory_path);
  game::IntervenidarEnv env(config);
  env.reset(t.seed);
  if (!start_state.empty()) env.set_start_state(read_state(start_state, config));
  const auto report = mdp::replay(t, env);
  json out = {{"steps_checked", report.steps_checked}, {"exact", report.exact()}};
  if (!report.exact()) {
    out["first_divergence"] = *report.first_divergence;
    out["detail"] = report.detail;
  }
  std::cout << out.dump() << "\n";
  return report.exact() ? 0 : 1;
}

// ---------------------------------------------------------------- intervene

struct InterveneArgs {
  std::string config = kDefaultBoard;
  std::string kind;
  std::uint64_t seed = 0;
  std::optional<int> count;
  std::optional<int> shift;
  std::string start_state;
  std::string output;
  std::string report;
};

int cmd_intervene(const InterveneArgs& a) {
  interventions::Kind kind;
  try {
    kind = interventions::kind_from_string(a.kind);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  auto config = game::load_config(a.config);
  const auto start = a.start_state.empty() ? game::new_game(config) : read_state(a.start_state, config);
  auto iv = interventions::sample_condition(kind, a.seed, *config);
  if (a.count) iv.count = *a.count;
  if (a.shift) iv.shift = *a.shift;
  const auto applied = interventions::apply(start, iv);
  const auto verdict = interventions::verify_unreachable(applied.state, *config);

  json report = applied.report.to_json();
  report["unreachable"] = {{"proved", verdict.unreachable}, {"justification", verdict.justification}};
  if (!a.output.empty()) {
    write_text(a.output, json{{"state", game::state_to_json(applied.state)}, {"report", report}}.dump(2) + "\n");
  }
  if (!a.report.empty()) {
    write_text(a.report, report.dump(2) + "\n");
  } else {
    std::cout << report.dump(2) << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  std::string config = kDefaultBoard;
  std::string method;
  std::string agent = "builtin:random";
  std::string evaluated = "builtin:random";
  std::string archive;
  std::string entry;
  int n = 100;
  int k = 10;
  std::uint64_t seed = 0;
  int max_retries = stategen::kDefaultMaxRetries;
  std::string output;
  int timeout_ms = 5000;
};

int cmd_generate(const GenerateArgs& a) {
  stategen::Method method;
  try {
    method = stategen::method_from_string(a.method);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  auto config = game::load_config(a.config);
  stategen::GenerationOptions options{a.max_retries};
  stategen::GeneratedState g;
  switch (method) {
    case stategen::Method::kKopa: {
      auto agent = agent_from_spec(a.agent, a.timeout_ms);
      g = stategen::kopa_state(*agent, config, a.n, a.k, a.seed, options);
      break;
    }
    case stategen::Method::kAgentSwap: {
      auto alternative = agent_from_spec(a.agent, a.timeout_ms);
      auto evaluated = agent_from_spec(a.evaluated, a.timeout_ms);
      g = stategen::agent_swap_state(*alternative, evaluated->id(), config, a.n, a.seed, options);
      break;
    }
    case stategen::Method::kHumanStart: {
      if (a.archive.empty() || a.entry.empty()) throw UsageError("--archive and --entry are required for HS");
      stategen::HumanPlayArchive archive(a.archive);
      g = stategen::human_start_state(archive, a.entry, a.n, config);
      break;
    }
  }
  const json doc = {{"state", game::state_to_json(g.state)}, {"provenance", g.provenance.to_json()}};
  if (a.output.empty()) {
    std::cout << doc.dump(2) << "\n";
  } else {
    write_text(a.output, doc.dump(2) + "\n");
    std::cout << json{{"digest", g.provenance.digest.hex()}, {"attempts", g.provenance.attempts}}.dump() << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------- archive

int cmd_archive_ingest(const std::string& dir, const std::string& config_path, const std::string& player,
                       const std::vector<std::string>& files) {
  auto config = game::load_config(config_path);
  stategen::HumanPlayArchive archive(dir);
  int rejected = 0;
  for (const auto& f : files) {
    const auto entry = archive.append(mdp::load_trajectory(f), player, config);
    std::cout << entry.to_json().dump() << "\n";
    if (!entry.ok()) ++rejected;
  }
  return rejected == 0 ? 0 : 1;
}

int cmd_archive_synthesize(const std::string& dir, const std::string& config_path, const std::string& agent_spec,
                           const std::string& player, int sessions, std::uint64_t seed, int max_steps) {
  auto config = game::load_config(config_path);
  stategen::HumanPlayArchive archive(dir);
  auto agent = agent_from_spec(agent_spec, 5000);
  for (const auto& e : stategen::record_sessions(archive, *agent, player, config, sessions, seed, max_steps)) {
    std::cout << e.to_json().dump() << "\n";
  }
  return 0;
}

int cmd_archive_list(const std::string& dir) {
  stategen::HumanPlayArchive archive(dir);
  for (const auto& e : archive.entries()) std::cout << e.to_json().dump() << "\n";
  return 0;
}

// ---------------------------------------------------------------- experiment

int cmd_experiment(const std::string& config_path, const std::string& output, std::optional<int> workers,
                   std::optional<std::size_t> stop_after, bool quiet) {
  eval::ExperimentConfig config;
  try {
    config = eval::ExperimentConfig::load(config_path);
  } catch (const FormatError& e) {
    throw UsageError(e.what());  // a malformed config is the caller's mistake
  }
  if (!output.empty()) config.output = output;
  if (workers) config.workers = *workers;
  eval::RunOptions options;
  options.stop_after = stop_after;
  if (!quiet) options.log = [](const std::string& line) { std::cerr << line << "\n"; };
  try {
    const auto result = eval::run_experiment(config, options);
    std::cout << result.summary.to_csv();
  } catch (const eval::Interrupted& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 0;
}

int cmd_experiment_template(const std::string& path, const std::string& environment, const std::string& agent,
                            const std::string& alternative, const std::string& archive, std::uint64_t seed) {
  eval::ExperimentConfig c;
  c.environment = environment;
  c.agent = agent;
  c.seed = seed;
  c.output = "results";
  c.conditions = eval::default_conditions(alternative, archive);
  write_text(path, c.to_json().dump(2) + "\n");
  return 0;
}

// ---------------------------------------------------------------- render

int cmd_render(const std::string& config_path, const std::string& state_path, const std::string& trajectory_path,
               std::optional<int> step, int tile_px, const std::string& output) {
  auto config = game::load_config(config_path);
  game::GameState state = state_path.empty() ? game::new_game(config) : read_state(state_path, config);
  if (!trajectory_path.empty()) {
    const auto t = mdp::load_trajectory(trajectory_path);
    const std::size_t upto = step ? static_cast<std::size_t>(*step) : t.steps.size();
    if (upto > t.steps.size()) throw Error("--step is beyond the trajectory length");
    if (latent_digest(state) != t.start_digest) throw Error("trajectory does not start from this state");
    for (std::size_t i = 0; i < upto; ++i) game::step_in_place(state, static_cast<game::Action>(t.steps[i].action));
  } else if (step) {
    throw UsageError("--step needs --trajectory");
  }
  render::RenderConfig rc;
  rc.tile_px = tile_px;
  render::write_pgm(render::render(state, rc), output);
  return 0;
}

// ---------------------------------------------------------------- gridworld

int cmd_gridworld(const std::string& map_path, const std::string& policy_name, int episodes, double epsilon,
                  std::uint64_t seed, bool show_values) {
  const auto grid = gridworld::GridConfig::load(map_path);
  gridworld::GridPolicy policy;
  std::optional<gridworld::QTable> table;
  if (policy_name == "right") {
    policy = [](gridworld::Cell) { return gridworld::GridAction::kRight; };
  } else if (policy_name == "q") {
    table = gridworld::tabular_q_learn(grid, {episodes, epsilon, 0.5, seed});
    policy = [&t = *table](gridworld::Cell c) { return t.greedy(c); };
  } else {
    throw UsageError("unknown GridWorld policy '" + policy_name + "' (expected right or q)");
  }
  std::cout << gridworld::partition(grid, policy).to_text(grid);
  if (show_values && table) {
    for (int r = 0; r < grid.height; ++r) {
      for (int c = 0; c < grid.width; ++c) {
        const gridworld::Cell cell{c, r};
        std::cout << (c ? " " : "") << (grid.open(cell) ? eval::format_real(table->value(cell)) : std::string("#"));
      }
      std::cout << "\n";
    }
  }
  return 0;
}

// ---------------------------------------------------------------- agent-serve

int cmd_agent_serve(const std::string& agent_spec, const std::string& config_path, std::optional<int> port,
                    bool once) {
  auto config = game::load_config(config_path);
  auto agent = agent_from_spec(agent_spec, 5000);
  if (!port) {
    bridge::FdStream stdio(0, 1);
    bridge::serve_agent(stdio, *agent, config);
    return 0;
  }
  bridge::TcpListener listener(static_cast<std::uint16_t>(*port));
  std::cerr << "agent '" << agent->id() << "' listening on 127.0.0.1:" << listener.port() << std::endl;
  do {
    auto stream = listener.accept();
    try {
      bridge::serve_agent(*stream, *agent, config);
    } catch (const Error& e) {
      std::cerr << "session ended: " << e.what() << "\n";
    }
  } while (!once);
  return 0;
}

// ---------------------------------------------------------------- serve

int cmd_serve(const std::vector<std::string>& configs, const std::string& archive_dir, int port, int tile_px) {
  std::vector<game::ConfigPtr> loaded;
  for (const auto& c : configs) loaded.push_back(game::load_config(c));
  render::RenderConfig rc;
  rc.tile_px = tile_px;
  play::SessionManager sessions(loaded, std::make_shared<stategen::HumanPlayArchive>(archive_dir), rc);

  // Handle SIGINT/SIGTERM synchronously: block them before any thread starts.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  play::PlayServer server(sessions, static_cast<std::uint16_t>(port));
  server.start();
  std::cerr << "play service listening on ws://127.0.0.1:" << server.port() << "/" << std::endl;
  int sig = 0;
  sigwait(&set, &sig);
  server.stop();
  std::cerr << "stopped (" << sessions.live_sessions() << " unclosed sessions discarded)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Intervenidar simulator, state generators and generalization-evaluation harness"};
  app.set_help_all_flag("--help-all", "Show help for every subcommand");
  bool print_version = false;
  bool print_schema = false;
  app.add_flag("--version", print_version, "Print version information as JSON and exit");
  app.add_flag("--print-config-schema", print_schema, "Print the experiment-config JSON Schema and exit");

  // play
  PlayArgs play_args;
  auto* play = app.add_subcommand("play", "Run one episode and write its trajectory");
  play->add_option("--config", play_args.config, "Board config (JSON)")->capture_default_str();
  play->add_option("--agent", play_args.agent, "Agent spec: builtin:<name>, exec:<command> or tcp:<host>:<port>")
      ->capture_default_str();
  play->add_option("--seed", play_args.seed, "Episode seed")->capture_default_str();
  play->add_option("--max-steps", play_args.max_steps, "Step limit")->capture_default_str()->check(CLI::PositiveNumber);
  play->add_option("--start-state", play_args.start_state, "Start from this state file instead of the canonical start");
  play->add_option("--timeout-ms", play_args.timeout_ms, "Per-action timeout for wire agents")->capture_default_str();
  play->add_option("-o,--output", play_args.output, "Trajectory output file (JSON lines)")->required();

  // replay
  std::string replay_config = kDefaultBoard, replay_trajectory, replay_start;
  auto* replay = app.add_subcommand("replay", "Re-execute a trajectory and verify every step digest");
  replay->add_option("--config", replay_config, "Board config (JSON)")->capture_default_str();
  replay->add_option("--start-state", replay_start, "State the trajectory starts from (default: canonical start)");
  replay->add_option("trajectory", replay_trajectory, "Trajectory file")->required();

  // intervene
  InterveneArgs iv_args;
  auto* intervene = app.add_subcommand("intervene", "Apply one intervention to a start state");
  intervene->add_option("--config", iv_args.config, "Board config (JSON)")->capture_default_str();
  intervene->add_option("--kind", iv_args.kind, "ER, ES, ALS, FLS or PRS")->required();
  intervene->add_option("--seed", iv_args.seed, "Seed for parameter sampling and placement")->capture_default_str();
  intervene->add_option("--count", iv_args.count, "Enemies removed (ER) or segments filled (FLS); sampled if absent");
  intervene->add_option("--shift", iv_args.shift, "Enemy shift in steps (ES); sampled if absent");
  intervene->add_option("--start-state", iv_args.start_state, "Start state file (default: canonical start)");
  intervene->add_option("-o,--output", iv_args.output, "Write the intervened state and report here");
  intervene->add_option("--report", iv_args.report, "Write the report here instead of stdout");

  // generate
  GenerateArgs gen_args;
  auto* generate = app.add_subcommand("generate", "Generate an off-policy start state (k-OPA, AS or HS)");
  generate->add_option("--config", gen_args.config, "Board config (JSON)")->capture_default_str();
  generate->add_option("--method", gen_args.method, "k-OPA, AS or HS")->required();
  generate->add_option("--agent", gen_args.agent, "k-OPA: the on-policy agent; AS: the alternative agent")
      ->capture_default_str();
  generate->add_option("--evaluated", gen_args.evaluated, "AS: the agent under evaluation (must differ)")
      ->capture_default_str();
  generate->add_option("--archive", gen_args.archive, "HS: human-play archive directory");
  generate->add_option("--entry", gen_args.entry, "HS: archive entry id");
  generate->add_option("-n", gen_args.n, "Prefix length in steps")->capture_default_str()->check(CLI::NonNegativeNumber);
  generate->add_option("-k", gen_args.k, "k-OPA: random actions after the prefix")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  generate->add_option("--seed", gen_args.seed, "Generation seed")->capture_default_str();
  generate->add_option("--max-retries", gen_args.max_retries, "Attempts before reporting infeasible")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  generate->add_option("--timeout-ms", gen_args.timeout_ms, "Per-action timeout for wire agents")->capture_default_str();
  generate->add_option("-o,--output", gen_args.output, "Write state and provenance here (default: stdout)");

  // archive
  auto* archive = app.add_subcommand("archive", "Manage human-play archives");
  archive->require_subcommand(1);
  std::string ar_dir, ar_config = kDefaultBoard, ar_player = "anonymous", ar_agent = "builtin:wandering-painter";
  std::vector<std::string> ar_files;
  int ar_sessions = 10, ar_max_steps = 5000;
  std::uint64_t ar_seed = 0;
  auto* ingest = archive->add_subcommand("ingest", "Replay-verify trajectory files and append them");
  ingest->add_option("--archive", ar_dir, "Archive directory (created if missing)")->required();
  ingest->add_option("--config", ar_config, "Board config the sessions were played on")->capture_default_str();
  ingest->add_option("--player", ar_player, "Player id")->capture_default_str();
  ingest->add_option("files", ar_files, "Trajectory files")->required()->check(CLI::ExistingFile);
  auto* synth = archive->add_subcommand("synthesize", "Record scripted sessions as a stand-in for human play");
  synth->add_option("--archive", ar_dir, "Archive directory (created if missing)")->required();
  synth->add_option("--config", ar_config, "Board config")->capture_default_str();
  synth->add_option("--agent", ar_agent, "Agent spec")->capture_default_str();
  synth->add_option("--player", ar_player, "Player id recorded in the index")->capture_default_str();
  synth->add_option("--sessions", ar_sessions, "Number of sessions")->capture_default_str()->check(CLI::PositiveNumber);
  synth->add_option("--seed", ar_seed, "Session seed")->capture_default_str();
  synth->add_option("--max-steps", ar_max_steps, "Step limit per session")->capture_default_str();
  auto* list = archive->add_subcommand("list", "Print the archive index, one entry per line");
  list->add_option("--archive", ar_dir, "Archive directory")->required();

  // experiment
  std::string ex_config, ex_output;
  std::optional<int> ex_workers;
  std::optional<std::size_t> ex_stop_after;
  bool ex_quiet = false;
  auto* experiment = app.add_subcommand("experiment", "Run an evaluation suite from an experiment config");
  experiment->add_option("config", ex_config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  experiment->add_option("--output", ex_output, "Override the output directory");
  experiment->add_option("--workers", ex_workers, "Override the worker count")->check(CLI::PositiveNumber);
  experiment->add_option("--stop-after", ex_stop_after, "Stop after this many new records (resume later)");
  experiment->add_flag("-q,--quiet", ex_quiet, "No progress output");

  std::string tpl_path, tpl_env = kDefaultBoard, tpl_agent = "builtin:random", tpl_alt, tpl_archive;
  std::uint64_t tpl_seed = 0;
  auto* tpl = app.add_subcommand("experiment-template", "Write an experiment config with the default suite");
  tpl->add_option("output", tpl_path, "Config file to write")->required();
  tpl->add_option("--environment", tpl_env, "Board config")->capture_default_str();
  tpl->add_option("--agent", tpl_agent, "Agent under evaluation")->capture_default_str();
  tpl->add_option("--alternative", tpl_alt, "Adds AS conditions driven by this agent");
  tpl->add_option("--archive", tpl_archive, "Adds HS conditions from this archive");
  tpl->add_option("--seed", tpl_seed, "Top-level seed")->capture_default_str();

  // render
  std::string rd_config = kDefaultBoard, rd_state, rd_traj, rd_output;
  std::optional<int> rd_step;
  int rd_tile = 4;
  auto* rend = app.add_subcommand("render", "Export a frame as binary PGM");
  rend->add_option("--config", rd_config, "Board config")->capture_default_str();
  rend->add_option("--state", rd_state, "State file (default: canonical start)");
  rend->add_option("--trajectory", rd_traj, "Advance along this trajectory first");
  rend->add_option("--step", rd_step, "Trajectory step to render (default: last)")->check(CLI::NonNegativeNumber);
  rend->add_option("--tile-px", rd_tile, "Pixels per tile")->capture_default_str()->check(CLI::Range(2, 64));
  rend->add_option("-o,--output", rd_output, "PGM file")->required();

  // gridworld
  std::string gw_map = std::string(INTERVENIDAR_DATA_DIR) + "/gridworld/figure_replica.txt", gw_policy = "q";
  int gw_episodes = 1000;
  double gw_epsilon = 0.5;
  std::uint64_t gw_seed = 0;
  bool gw_values = false;
  auto* grid = app.add_subcommand("gridworld", "Partition a GridWorld into on-policy, off-policy and unreachable cells");
  grid->add_option("--map", gw_map, "GridWorld map (text)")->capture_default_str();
  grid->add_option("--policy", gw_policy, "right (always right) or q (greedy after tabular Q-learning)")
      ->capture_default_str();
  grid->add_option("--episodes", gw_episodes, "Q-learning episodes")->capture_default_str()->check(CLI::PositiveNumber);
  grid->add_option("--epsilon", gw_epsilon, "Q-learning exploration rate")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  grid->add_option("--seed", gw_seed, "Q-learning seed")->capture_default_str();
  grid->add_flag("--values", gw_values, "Also print the learned state values");

  // agent-serve
  std::string as_agent = "builtin:random", as_config = kDefaultBoard;
  std::optional<int> as_port;
  bool as_once = false;
  auto* agent_serve = app.add_subcommand("agent-serve", "Expose an agent over the wire protocol (stdio or TCP)");
  agent_serve->add_option("--agent", as_agent, "Agent spec")->capture_default_str();
  agent_serve->add_option("--config", as_config, "Board config for latent observations")->capture_default_str();
  agent_serve->add_option("--port", as_port, "Listen on 127.0.0.1:<port> instead of stdio (0 picks one)")
      ->check(CLI::Range(0, 65535));
  agent_serve->add_flag("--once", as_once, "TCP: exit after the first connection");

  // serve
  std::vector<std::string> sv_configs;
  std::string sv_archive;
  int sv_port = 8765, sv_tile = 4;
  auto* serve = app.add_subcommand("serve", "Run the human-play WebSocket service");
  serve->add_option("--config", sv_configs, "Playable board configs; the first is the default");
  serve->add_option("--archive", sv_archive, "Archive directory for finished sessions")->required();
  serve->add_option("--port", sv_port, "Listen port on 127.0.0.1 (0 picks one)")->capture_default_str()->check(CLI::Range(0, 65535));
  serve->add_option("--tile-px", sv_tile, "Pixels per tile in frames")->capture_default_str()->check(CLI::Range(2, 64));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (print_version) {
      std::cout << version_info().dump(2) << "\n";
      return 0;
    }
    if (print_schema) {
      std::cout << eval::experiment_schema().dump(2) << "\n";
      return 0;
    }
    if (*play) return cmd_play(play_args);
    if (*replay) return cmd_replay(replay_config, replay_trajectory, replay_start);
    if (*intervene) return cmd_intervene(iv_args);
    if (*generate) return cmd_generate(gen_args);
    if (*ingest) return cmd_archive_ingest(ar_dir, ar_config, ar_player, ar_files);
    if (*synth) return cmd_archive_synthesize(ar_dir, ar_config, ar_agent, ar_player, ar_sessions, ar_seed, ar_max_steps);
    if (*list) return cmd_archive_list(ar_dir);
    if (*experiment) return cmd_experiment(ex_config, ex_output, ex_workers, ex_stop_after, ex_quiet);
    if (*tpl) return cmd_experiment_template(tpl_path, tpl_env, tpl_agent, tpl_alt, tpl_archive, tpl_seed);
    if (*rend) return cmd_render(rd_config, rd_state, rd_traj, rd_step, rd_tile, rd_output);
    if (*grid) return cmd_gridworld(gw_map, gw_policy, gw_episodes, gw_epsilon, gw_seed, gw_values);
    if (*agent_serve) return cmd_agent_serve(as_agent, as_config, as_port, as_once);
    if (*serve) {
      if (sv_configs.empty()) sv_configs.push_back(kDefaultBoard);
      return cmd_serve(sv_configs, sv_archive, sv_port, sv_tile);
    }
    std::cerr << app.help();
    return 2;
  } catch (const bridge::UnknownAgentError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
