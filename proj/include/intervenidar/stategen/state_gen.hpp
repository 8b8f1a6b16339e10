#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "intervenidar/bridge/agent.hpp"
#include "intervenidar/game/game.hpp"
#include "intervenidar/mdp/digest.hpp"
#include "intervenidar/stategen/archive.hpp"

namespace intervenidar::stategen {

inline constexpr int kDefaultPrefixLengths[] = {100, 200, 300, 400, 500, 600, 700, 800, 900};
inline constexpr int kDefaultRandomActions[] = {10, 20};
inline constexpr int kDefaultMaxRetries = 25;

enum class Method : std::uint8_t { kKopa, kAgentSwap, kHumanStart };
std::string to_string(Method m);
Method method_from_string(const std::string& s);

// Everything needed to rebuild a generated state bit-exactly: the config it
// was generated in and the full action sequence from the canonical start.
// The remaining fields record how that sequence was obtained.
struct Provenance {
  Method method = Method::kKopa;
  std::string source;  // agent id (k-OPA, AS) or archive entry id (HS)
  std::string config_hash;
  int n = 0;
  int k = 0;
  std::uint64_t requested_seed = 0;
  std::uint64_t seed = 0;  // seed of the attempt that succeeded
  int attempts = 1;
  std::vector<int> actions;
  mdp::Digest digest;

  nlohmann::json to_json() const;
  static Provenance from_json(const nlohmann::json& j);
};

struct GeneratedState {
  game::GameState state;
  Provenance provenance;
};

// Every attempt terminated before the requested step.
class InfeasibleError : public Error {
 public:
  InfeasibleError(std::string message, int attempts) : Error(std::move(message)), attempts(attempts) {}
  int attempts;
};

struct GenerationOptions {
  int max_retries = kDefaultMaxRetries;
};

// Seed used for attempt `attempt` (0-based) of a generation request.
std::uint64_t attempt_seed(std::uint64_t seed, int attempt);

// n actions of `agent`, then k uniform-random actions from the attempt seed's
// "kopa" stream. The episode must still be live afterwards; failed attempts
// are retried with fresh seeds up to the retry bound.
GeneratedState kopa_state(bridge::Agent& agent, const game::ConfigPtr& config, int n, int k,
                          std::uint64_t seed, const GenerationOptions& options = {});

// n actions of the alternative agent. Rejects an alternative whose id equals
// the evaluated agent's.
GeneratedState agent_swap_state(bridge::Agent& alternative, const std::string& evaluated_agent_id,
                                const game::ConfigPtr& config, int n, std::uint64_t seed,
                                const GenerationOptions& options = {});

// State at step n of an archived session. The entry must be ok and longer
// than n; a session that no longer replays is tombstoned and rejected.
GeneratedState human_start_state(HumanPlayArchive& archive, const std::string& entry_id, int n,
                                 const game::ConfigPtr& config);
std::vector<GeneratedState> human_start_states(HumanPlayArchive& archive, const std::string& entry_id,
                                               std::span<const int> ns, const game::ConfigPtr& config);

// Rebuilds the state from its provenance and checks the digest.
game::GameState regenerate(const Provenance& provenance, const game::ConfigPtr& config);

// Digests of every state an agent visits from the canonical start, the
// start included, over at most `steps` steps.
std::vector<mdp::Digest> on_policy_digests(bridge::Agent& agent, const game::ConfigPtr& config,
                                           std::uint64_t seed, int steps);

struct OverlapReport {
  std::size_t generated = 0;
  // Size of the multiset intersection of the two digest lists.
  std::size_t overlapping = 0;
  // Distinct digests present in both, sorted.
  std::vector<mdp::Digest> shared;

  double fraction() const { return generated == 0 ? 0.0 : static_cast<double>(overlapping) / generated; }
  nlohmann::json to_json() const;
};

OverlapReport overlap_audit(std::span<const mdp::Digest> generated, std::span<const mdp::Digest> reference);

// Records `sessions` episodes of `agent` (each seeded from `seed`'s
// "session" stream) into the archive under `player`. Used to stand in for
// human play when no recorded sessions exist.
std::vector<ArchiveEntry> record_sessions(HumanPlayArchive& archive, bridge::Agent& agent, const std::string& player,
                                          const game::ConfigPtr& config, int sessions, std::uint64_t seed,
                                          int max_steps);

}  // namespace intervenidar::stategen
