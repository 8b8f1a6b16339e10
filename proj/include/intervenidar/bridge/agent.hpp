#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "intervenidar/game/env.hpp"
#include "intervenidar/mdp/mdp.hpp"

namespace intervenidar::bridge {

inline constexpr std::uint16_t kProtocolVersion = 1;

enum class ObservationKind : std::uint8_t { kPixels = 0, kLatent = 1 };

// The outcome of capability negotiation.
struct Capabilities {
  std::uint16_t protocol_version = kProtocolVersion;
  ObservationKind observation = ObservationKind::kLatent;
  bool value = false;
  bool q_values = false;
  bool embedding = false;

  bool operator==(const Capabilities&) const = default;
};

// A policy source for Intervenidar episodes: built-in scripted agents and
// remote agents behind the wire protocol share this interface.
class Agent {
 public:
  virtual ~Agent() = default;
  virtual std::string id() const = 0;
  virtual Capabilities capabilities() const = 0;
  virtual void begin_episode(std::uint64_t seed) = 0;
  // Throws AgentError on protocol failure.
  virtual mdp::PolicyResponse act(const game::ObservationSource& view) = 0;
};

using AgentPtr = std::unique_ptr<Agent>;

// Adapter so any Agent satisfies mdp::Policy<_, IntervenidarEnv>.
class AgentPolicy {
 public:
  explicit AgentPolicy(Agent& agent) : agent_(agent) {}
  void begin_episode(std::uint64_t seed) { agent_.begin_episode(seed); }
  mdp::PolicyResponse act(const game::IntervenidarEnv& env) { return agent_.act(env); }

 private:
  Agent& agent_;
};

}  // namespace intervenidar::bridge
