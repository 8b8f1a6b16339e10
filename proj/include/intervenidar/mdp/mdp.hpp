#pragma once

#include <concepts>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "intervenidar/mdp/digest.hpp"

namespace intervenidar::mdp {

// The parts of <S, A, T, R> that are shared across environments. S, T and R
// live inside each environment; here we only keep the action count and the
// training discount, which the metrics in this repo never use (TAR is
// undiscounted).
struct MdpSpec {
  int action_count = 0;
  double gamma = 1.0;

  void validate() const;
};

template <class State>
struct StepResult {
  State next_state;
  double reward = 0.0;
  bool terminal = false;
};

// What a policy returns for one decision. Only `action` is mandatory; the
// optional channels feed VEE and embedding-distance analysis.
struct PolicyResponse {
  int action = 0;
  std::optional<double> value;
  std::optional<std::vector<double>> q_values;
  std::optional<std::vector<double>> embedding;
};

// An environment usable by run_episode / replay. step() is rejected once the
// environment is terminal; cumulative_reward() counts rewards emitted since
// the environment was last reset or given a start state.
template <class Env>
concept Environment = requires(Env& env, const Env& cenv, int action) {
  { cenv.env_id() } -> std::convertible_to<std::string>;
  { cenv.config_hash() } -> std::convertible_to<std::string>;
  { cenv.spec() } -> std::same_as<MdpSpec>;
  { cenv.digest() } -> std::same_as<Digest>;
  { cenv.terminal() } -> std::same_as<bool>;
  { cenv.cumulative_reward() } -> std::convertible_to<double>;
  { env.step(action).reward } -> std::convertible_to<double>;
  { env.step(action).terminal } -> std::convertible_to<bool>;
};

template <class A, class Env>
concept Policy = requires(A& agent, const Env& env, std::uint64_t seed) {
  agent.begin_episode(seed);
  { agent.act(env) } -> std::same_as<PolicyResponse>;
};

}  // namespace intervenidar::mdp
