#include "intervenidar/stategen/state_gen.hpp"

#include <algorithm>
#include <map>

#include "intervenidar/game/env.hpp"
#include "intervenidar/mdp/episode.hpp"
#include "intervenidar/mdp/rng.hpp"

namespace intervenidar::stategen {

using nlohmann::json;

std::string to_string(Method m) {
  switch (m) {
    case Method::kKopa: return "k-OPA";
    case Method::kAgentSwap: return "AS";
    case Method::kHumanStart: return "HS";
  }
  return "?";
}

Method method_from_string(const std::string& s) {
  if (s == "k-OPA" || s == "kopa") return Method::kKopa;
  if (s == "AS" || s == "agent-swap") return Method::kAgentSwap;
  if (s == "HS" || s == "human-start") return Method::kHumanStart;
  throw FormatError("unknown generation method '" + s + "'");
}

json Provenance::to_json() const {
  return {{"method", to_string(method)},
          {"source", source},
          {"config_hash", config_hash},
          {"n", n},
          {"k", k},
          {"requested_seed", requested_seed},
          {"seed", seed},
          {"attempts", attempts},
          {"actions", actions},
          {"digest", digest.hex()}};
}

Provenance Provenance::from_json(const json& j) {
  try {
    Provenance p;
    p.method = method_from_string(j.at("method").get<std::string>());
    p.source = j.at("source").get<std::string>();
    p.config_hash = j.at("config_hash").get<std::string>();
    p.n = j.at("n").get<int>();
    p.k = j.at("k").get<int>();
    p.requested_seed = j.at("requested_seed").get<std::uint64_t>();
    p.seed = j.at("seed").get<std::uint64_t>();
    p.attempts = j.at("attempts").get<int>();
    p.actions = j.at("actions").get<std::vector<int>>();
    p.digest = mdp::Digest::from_hex(j.at("digest").get<std::string>());
    return p;
  } catch (const json::exception& e) {
    throw FormatError(std::string("provenance: ") + e.what());
  }
}

std::uint64_t attempt_seed(std::uint64_t seed, int attempt) {
  return attempt == 0 ? seed : mdp::derive_seed(seed, "retry-" + std::to_string(attempt));
}

namespace {

// Runs `prefix` agent steps then `random` uniform actions; returns false if
// the game ended (or the agent failed) before all of them were taken, or if
// the final state is terminal.
bool rollout(game::IntervenidarEnv& env, bridge::Agent* agent, int prefix, int random, std::uint64_t seed,
             std::vector<int>& actions) {
  env.reset();
  actions.clear();
  if (agent) agent->begin_episode(seed);
  auto rng = mdp::Rng::derived(seed, "kopa");
  for (int i = 0; i < prefix + random; ++i) {
    if (env.terminal()) return false;
    int a = 0;
    if (i < prefix) {
      try {
        a = agent->act(env).action;
      } catch (const AgentError&) {
        return false;
      }
      if (a < 0 || a >= game::kActionCount) return false;
    } else {
      a = static_cast<int>(rng.uniform_below(game::kActionCount));
    }
    env.step(a);
    actions.push_back(a);
  }
  return !env.terminal();
}

GeneratedState generate(bridge::Agent* agent, const game::ConfigPtr& config, int n, int k, std::uint64_t seed,
                        const GenerationOptions& options, Provenance base) {
  if (n < 0 || k < 0) throw Error("state generation: n and k must be non-negative");
  game::IntervenidarEnv env(config);
  std::vector<int> actions;
  const int attempts = std::max(1, options.max_retries);
  for (int attempt = 0; attempt < attempts; ++attempt) {
    const std::uint64_t s = attempt_seed(seed, attempt);
    if (!rollout(env, agent, n, k, s, actions)) continue;
    base.config_hash = config->hash();
    base.n = n;
    base.k = k;
    base.requested_seed = seed;
    base.seed = s;
    base.attempts = attempt + 1;
    base.actions = actions;
    base.digest = env.digest();
    return {env.state(), std::move(base)};
  }
  throw InfeasibleError(to_string(base.method) + ": episode of '" + base.source + "' ended before step " +
                            std::to_string(n + k) + " in all " + std::to_string(attempts) + " attempts",
                        attempts);
}

}  // namespace

GeneratedState kopa_state(bridge::Agent& agent, const game::ConfigPtr& config, int n, int k, std::uint64_t seed,
                          const GenerationOptions& options) {
  Provenance p;
  p.method = Method::kKopa;
  p.source = agent.id();
  return generate(&agent, config, n, k, seed, options, std::move(p));
}

GeneratedState agent_swap_state(bridge::Agent& alternative, const std::string& evaluated_agent_id,
                                const game::ConfigPtr& config, int n, std::uint64_t seed,
                                const GenerationOptions& options) {
  if (alternative.id() == evaluated_agent_id) {
    throw Error("agent swap: alternative agent '" + alternative.id() + "' is the agent under evaluation");
  }
  Provenance p;
  p.method = Method::kAgentSwap;
  p.source = alternative.id();
  return generate(&alternative, config, n, 0, seed, options, std::move(p));
}

std::vector<GeneratedState> human_start_states(HumanPlayArchive& archive, const std::string& entry_id,
                                               std::span<const int> ns, const game::ConfigPtr& config) {
  const auto entry = archive.find(entry_id);
  if (!entry) throw Error("human start: no archive entry '" + entry_id + "'");
  if (!entry->ok()) throw Error("human start: entry '" + entry_id + "' is tombstoned (" + entry->reason + ")");
  if (entry->config_hash != config->hash()) {
    throw ConfigMismatchError("human start: entry '" + entry_id + "' was recorded for another config");
  }
  const int longest = ns.empty() ? 0 : *std::max_element(ns.begin(), ns.end());
  if (static_cast<std::size_t>(longest) >= entry->length) {
    throw Error("human start: entry '" + entry_id + "' has " + std::to_string(entry->length) +
                " steps, cannot extract step " + std::to_string(longest));
  }

  const mdp::Trajectory t = archive.load(entry_id);
  game::IntervenidarEnv env(config);
  const auto report = mdp::replay(t, env);
  if (!report.exact()) {
    archive.tombstone(entry_id, "replay diverged: " + report.detail);
    throw Error("human start: entry '" + entry_id + "' no longer replays (" + report.detail + "); tombstoned");
  }

  std::vector<int> order(ns.begin(), ns.end());
  std::sort(order.begin(), order.end());
  std::map<int, GeneratedState> by_n;
  env.reset();
  std::vector<int> actions;
  int pos = 0;
  for (int n : order) {
    if (n < 0) throw Error("human start: negative step");
    while (pos < n) {
      actions.push_back(t.steps[pos].action);
      env.step(t.steps[pos].action);
      ++pos;
    }
    Provenance p;
    p.method = Method::kHumanStart;
    p.source = entry_id;
    p.config_hash = config->hash();
    p.n = n;
    p.requested_seed = p.seed = t.seed;
    p.actions = actions;
    p.digest = env.digest();
    by_n.emplace(n, GeneratedState{env.state(), std::move(p)});
  }
  std::vector<GeneratedState> out;
  for (int n : ns) out.push_back(by_n.at(n));
  return out;
}

GeneratedState human_start_state(HumanPlayArchive& archive, const std::string& entry_id, int n,
                                 const game::ConfigPtr& config) {
  const int ns[] = {n};
  return human_start_states(archive, entry_id, ns, config).front();
}

game::GameState regenerate(const Provenance& p, const game::ConfigPtr& config) {
  if (p.config_hash != config->hash()) {
    throw ConfigMismatchError("regenerate: provenance is for config " + p.config_hash);
  }
  game::IntervenidarEnv env(config);
  for (int a : p.actions) {
    if (env.terminal()) throw Error("regenerate: game ended before the recorded actions ran out");
    env.step(a);
  }
  if (env.digest() != p.digest) throw Error("regenerate: state digest differs from provenance");
  return env.state();
}

std::vector<mdp::Digest> on_policy_digests(bridge::Agent& agent, const game::ConfigPtr& config, std::uint64_t seed,
                                           int steps) {
  game::IntervenidarEnv env(config);
  bridge::AgentPolicy policy(agent);
  const auto t = mdp::run_episode(env, policy, {seed, std::max(1, steps), "on-policy"});
  std::vector<mdp::Digest> out;
  for (const auto& s : t.steps) out.push_back(s.state);
  out.push_back(t.final_digest);
  return out;
}

json OverlapReport::to_json() const {
  json shared_hex = json::array();
  for (const auto& d : shared) shared_hex.push_back(d.hex());
  return {{"generated", generated}, {"overlapping", overlapping}, {"fraction", fraction()}, {"shared", shared_hex}};
}

OverlapReport overlap_audit(std::span<const mdp::Digest> generated, std::span<const mdp::Digest> reference) {
  std::map<mdp::Digest, std::size_t> counts;
  for (const auto& d : reference) ++counts[d];
  OverlapReport r;
  r.generated = generated.size();
  std::map<mdp::Digest, std::size_t> used;
  for (const auto& d : generated) {
    const auto it = counts.find(d);
    if (it == counts.end()) continue;
    auto& u = used[d];
    if (u < it->second) {
      ++u;
      ++r.overlapping;
    }
  }
  for (const auto& [d, n] : used) r.shared.push_back(d);
  return r;
}

std::vector<ArchiveEntry> record_sessions(HumanPlayArchive& archive, bridge::Agent& agent, const std::string& player,
                                          const game::ConfigPtr& config, int sessions, std::uint64_t seed,
                                          int max_steps) {
  auto rng = mdp::Rng::derived(seed, "session");
  game::IntervenidarEnv env(config);
  bridge::AgentPolicy policy(agent);
  std::vector<ArchiveEntry> out;
  for (int i = 0; i < sessions; ++i) {
    env.reset();
    auto t = mdp::run_episode(env, policy, {rng.next_u64(), max_steps, "session"});
    t.metadata["player"] = player;
    out.push_back(archive.append(t, player, config));
  }
  return out;
}

}  // namespace intervenidar::stategen
