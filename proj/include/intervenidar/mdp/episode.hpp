#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "intervenidar/mdp/error.hpp"
#include "intervenidar/mdp/mdp.hpp"
#include "intervenidar/mdp/trajectory.hpp"

namespace intervenidar::mdp {

struct EpisodeOptions {
  std::uint64_t seed = 0;
  int max_steps = 10000;
  std::string start_label = "control";
};

// Runs `agent` in `env` from whatever state the environment is currently in
// (freshly reset or explicitly configured). Rewards are copied verbatim from
// the environment. AgentError or an out-of-range action aborts the episode:
// the partial trajectory is returned with aborted = true.
template <class Env, class Agent>
  requires Environment<Env> && Policy<Agent, Env>
Trajectory run_episode(Env& env, Agent& agent, const EpisodeOptions& options) {
  if (options.max_steps <= 0) throw Error("run_episode: max-steps must be positive");
  const MdpSpec spec = env.spec();
  Trajectory t;
  t.env_id = env.env_id();
  t.config_hash = env.config_hash();
  t.seed = options.seed;
  t.start_label = options.start_label;
  t.start_digest = env.digest();

  agent.begin_episode(options.seed);
  while (!env.terminal() && static_cast<int>(t.steps.size()) < options.max_steps) {
    TrajectoryStep rec;
    rec.state = env.digest();
    PolicyResponse response;
    try {
      response = agent.act(env);
    } catch (const AgentError& e) {
      t.aborted = true;
      t.abort_reason = e.what();
      break;
    }
    if (response.action < 0 || response.action >= spec.action_count) {
      t.aborted = true;
      t.abort_reason = "agent returned out-of-range action " + std::to_string(response.action);
      break;
    }
    if ((response.value && !std::isfinite(*response.value))) {
      t.aborted = true;
      t.abort_reason = "agent returned a non-finite value estimate";
      break;
    }
    rec.action = response.action;
    rec.value = response.value;
    rec.q_values = std::move(response.q_values);
    rec.embedding = std::move(response.embedding);
    const auto result = env.step(rec.action);
    rec.reward = result.reward;
    t.steps.push_back(std::move(rec));
  }
  t.final_digest = env.digest();
  t.terminal = env.terminal();
  return t;
}

struct ReplayReport {
  std::size_t steps_checked = 0;
  // Index of the first step whose outcome (next-state digest, reward) differs
  // from the record. 0 is also used when the start state itself differs.
  std::optional<std::size_t> first_divergence;
  std::string detail;

  bool exact() const { return !first_divergence.has_value(); }
};

// Re-executes the recorded actions in `env`, which must already be positioned
// at the trajectory's start state. Rejects (ConfigMismatchError) before
// stepping when the environment id or config hash differs.
template <class Env>
  requires Environment<Env>
ReplayReport replay(const Trajectory& t, Env& env) {
  if (env.env_id() != t.env_id) {
    throw ConfigMismatchError("replay: trajectory recorded in '" + t.env_id + "', environment is '" +
                              env.env_id() + "'");
  }
  if (env.config_hash() != t.config_hash) {
    throw ConfigMismatchError("replay: config hash " + env.config_hash() + " does not match recorded " +
                              t.config_hash);
  }
  ReplayReport report;
  if (env.digest() != t.start_digest) {
    report.first_divergence = 0;
    report.detail = "start state digest differs";
    return report;
  }
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    const auto& rec = t.steps[i];
    if (env.terminal()) {
      report.first_divergence = i;
      report.detail = "environment terminated before recorded step " + std::to_string(i);
      return report;
    }
    const auto result = env.step(rec.action);
    ++report.steps_checked;
    const Digest& expected = (i + 1 < t.steps.size()) ? t.steps[i + 1].state : t.final_digest;
    if (result.reward != rec.reward) {
      report.first_divergence = i;
      report.detail = "reward differs at step " + std::to_string(i);
      return report;
    }
    if (env.digest() != expected) {
      report.first_divergence = i;
      report.detail = "state digest differs after step " + std::to_string(i);
      return report;
    }
  }
  if (env.terminal() != t.terminal) {
    report.first_divergence = t.steps.size();
    report.detail = "terminal flag differs at end of trajectory";
  }
  return report;
}

}  // namespace intervenidar::mdp
