#pragma once

#include <memory>
#include <optional>
#include <string>

#include "intervenidar/bridge/agent.hpp"
#include "intervenidar/bridge/transport.hpp"
#include "intervenidar/game/config.hpp"

namespace intervenidar::bridge {

class HandshakeError : public AgentError {
 public:
  using AgentError::AgentError;
};

struct Negotiated {
  Capabilities capabilities;
  std::string agent_id;
};

// Harness side of the handshake: sends `offer`, validates the reply. Throws
// HandshakeError on a version mismatch (both versions in the message), an
// ERROR reply, a malformed reply, or a choice outside the offer.
Negotiated negotiate(Stream& stream, const wire::Hello& offer = {}, Millis timeout = kDefaultTimeout);

// An agent living on the other end of a stream.
class RemoteAgent final : public Agent {
 public:
  RemoteAgent(std::unique_ptr<Stream> stream, Millis timeout = kDefaultTimeout, const wire::Hello& offer = {});
  ~RemoteAgent() override;

  std::string id() const override { return negotiated_.agent_id; }
  Capabilities capabilities() const override { return negotiated_.capabilities; }
  void begin_episode(std::uint64_t seed) override;
  // Sends RESET (first call of an episode), OBSERVE and ACT_REQUEST, then
  // waits for ACTION. Timeouts, transport failures, ERROR replies and
  // out-of-range or non-finite responses throw AgentError.
  mdp::PolicyResponse act(const game::ObservationSource& view) override;

 private:
  std::unique_ptr<Stream> stream_;
  Millis timeout_;
  Negotiated negotiated_;
  std::optional<std::uint64_t> pending_reset_;
};

wire::PixelObservation to_wire(const render::Observation& observation);
render::Observation from_wire(const wire::PixelObservation& observation);

// Agent side: answers protocol messages on `stream` with `agent` until BYE
// or end of stream. Latent observations are decoded against `config`.
// Returns normally on BYE or a clean close; protocol violations by the peer
// are answered with ERROR and end the session.
void serve_agent(Stream& stream, Agent& agent, const game::ConfigPtr& config);

}  // namespace intervenidar::bridge
