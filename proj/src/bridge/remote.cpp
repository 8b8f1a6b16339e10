#include "intervenidar/bridge/remote.hpp"

#include <cmath>

#include "intervenidar/game/state_io.hpp"

namespace intervenidar::bridge {

namespace {

constexpr Millis kServeIdleTimeout{24 * 3600 * 1000};

std::uint8_t channel_bits(const Capabilities& c) {
  std::uint8_t bits = 0;
  if (c.value) bits |= wire::kChannelValue;
  if (c.q_values) bits |= wire::kChannelQ;
  if (c.embedding) bits |= wire::kChannelEmbedding;
  return bits;
}

std::uint8_t offer_bit(ObservationKind k) {
  return k == ObservationKind::kPixels ? wire::kOfferPixels : wire::kOfferLatent;
}

// What a served agent sees: the most recent observation received.
class ServedView final : public game::ObservationSource {
 public:
  const game::GameState& latent() const override {
    if (!state_) throw AgentError("agent requires latent observations, none were sent");
    return *state_;
  }
  render::Observation pixels() const override {
    if (!pixels_) throw AgentError("agent requires pixel observations, none were sent");
    return *pixels_;
  }
  void set(game::GameState s) { state_ = std::move(s); }
  void set(render::Observation o) { pixels_ = std::move(o); }

 private:
  std::optional<game::GameState> state_;
  std::optional<render::Observation> pixels_;
};

}  // namespace

wire::PixelObservation to_wire(const render::Observation& observation) {
  wire::PixelObservation px;
  px.width = static_cast<std::uint16_t>(observation.frames[0].width);
  px.height = static_cast<std::uint16_t>(observation.frames[0].height);
  px.frames = static_cast<std::uint8_t>(render::kStackDepth);
  for (const auto& f : observation.frames) px.data.insert(px.data.end(), f.pixels.begin(), f.pixels.end());
  return px;
}

render::Observation from_wire(const wire::PixelObservation& px) {
  if (px.frames != render::kStackDepth) {
    throw FormatError("pixel observation carries " + std::to_string(px.frames) + " frames, expected " +
                      std::to_string(render::kStackDepth));
  }
  render::Observation o;
  const std::size_t size = std::size_t{px.width} * px.height;
  for (int i = 0; i < render::kStackDepth; ++i) {
    auto& f = o.frames[i];
    f.width = px.width;
    f.height = px.height;
    f.pixels.assign(px.data.begin() + static_cast<std::ptrdiff_t>(i * size),
                    px.data.begin() + static_cast<std::ptrdiff_t>((i + 1) * size));
  }
  return o;
}

Negotiated negotiate(Stream& stream, const wire::Hello& offer, Millis timeout) {
  send_message(stream, offer);
  wire::Message reply;
  try {
    reply = receive_message(stream, timeout);
  } catch (const FormatError& e) {
    throw HandshakeError(std::string("malformed handshake reply: ") + e.what());
  } catch (const AgentError& e) {
    throw HandshakeError(std::string("handshake failed: ") + e.what());
  }
  if (const auto* err = std::get_if<wire::ErrorMessage>(&reply)) {
    throw HandshakeError("agent rejected handshake: " + err->message);
  }
  const auto* ack = std::get_if<wire::HelloAck>(&reply);
  if (!ack) throw HandshakeError("expected HELLO_ACK, got " + wire::type_name(wire::type_of(reply)));
  if (ack->version != offer.version) {
    throw HandshakeError("protocol version mismatch: harness speaks " + std::to_string(offer.version) +
                         ", agent speaks " + std::to_string(ack->version));
  }
  if (!(offer.observations & offer_bit(ack->observation))) {
    throw HandshakeError("agent chose an observation kind that was not offered");
  }
  if (ack->channels & ~offer.channels) throw HandshakeError("agent enabled a channel that was not offered");
  Negotiated n;
  n.agent_id = ack->agent_id;
  n.capabilities.protocol_version = ack->version;
  n.capabilities.observation = ack->observation;
  n.capabilities.value = ack->channels & wire::kChannelValue;
  n.capabilities.q_values = ack->channels & wire::kChannelQ;
  n.capabilities.embedding = ack->channels & wire::kChannelEmbedding;
  return n;
}

RemoteAgent::RemoteAgent(std::unique_ptr<Stream> stream, Millis timeout, const wire::Hello& offer)
    : stream_(std::move(stream)), timeout_(timeout), negotiated_(negotiate(*stream_, offer, timeout)) {}

RemoteAgent::~RemoteAgent() {
  try {
    send_message(*stream_, wire::Bye{});
  } catch (const Error&) {
    // The peer may already be gone.
  }
}

void RemoteAgent::begin_episode(std::uint64_t seed) { pending_reset_ = seed; }

mdp::PolicyResponse RemoteAgent::act(const game::ObservationSource& view) {
  const game::GameState& state = view.latent();
  try {
    if (pending_reset_) {
      send_message(*stream_, wire::Reset{mdp::Digest::from_hex(state.config->hash()), *pending_reset_});
      pending_reset_.reset();
    }
    if (negotiated_.capabilities.observation == ObservationKind::kLatent) {
      send_message(*stream_, wire::Observe{wire::LatentObservation{game::state_to_json(state).dump()}});
    } else {
      send_message(*stream_, wire::Observe{to_wire(view.pixels())});
    }
    send_message(*stream_, wire::ActRequest{state.step});
    const wire::Message reply = receive_message(*stream_, timeout_);
    if (const auto* err = std::get_if<wire::ErrorMessage>(&reply)) throw AgentError("agent error: " + err->message);
    const auto* action = std::get_if<wire::Action>(&reply);
    if (!action) throw AgentError("expected ACTION, got " + wire::type_name(wire::type_of(reply)));
    if (action->action >= game::kActionCount) {
      throw AgentError("protocol error: action " + std::to_string(action->action) + " out of range");
    }
    const auto& caps = negotiated_.capabilities;
    if ((action->value && !caps.value) || (action->q_values && !caps.q_values) ||
        (action->embedding && !caps.embedding)) {
      throw AgentError("protocol error: response carries a channel that was not negotiated");
    }
    if (action->q_values && action->q_values->size() != static_cast<std::size_t>(game::kActionCount)) {
      throw AgentError("protocol error: q-values must have one entry per action");
    }
    return {action->action, action->value, action->q_values, action->embedding};
  } catch (const FormatError& e) {
    throw AgentError(std::string("protocol error: ") + e.what());
  }
}

void serve_agent(Stream& stream, Agent& agent, const game::ConfigPtr& config) {
  ServedView view;
  const Capabilities caps = agent.capabilities();
  std::uint8_t channels = 0;
  bool greeted = false;
  auto fail = [&](const std::string& message) {
    try {
      send_message(stream, wire::ErrorMessage{message});
    } catch (const Error&) {
    }
  };
  for (;;) {
    wire::Message m;
    try {
      m = receive_message(stream, kServeIdleTimeout);
    } catch (const TransportError&) {
      return;  // peer closed
    } catch (const FormatError& e) {
      fail(std::string("malformed message: ") + e.what());
      return;
    }
    if (std::holds_alternative<wire::Bye>(m)) return;
    if (const auto* hello = std::get_if<wire::Hello>(&m)) {
      if (hello->version != kProtocolVersion) {
        fail("protocol version mismatch: agent speaks " + std::to_string(kProtocolVersion) + ", harness speaks " +
             std::to_string(hello->version));
        return;
      }
      ObservationKind kind = caps.observation;
      if (!(hello->observations & offer_bit(kind))) {
        fail("agent needs " + std::string(kind == ObservationKind::kPixels ? "pixel" : "latent") +
             " observations, which the harness did not offer");
        return;
      }
      channels = channel_bits(caps) & hello->channels;
      send_message(stream, wire::HelloAck{kProtocolVersion, kind, channels, agent.id()});
      greeted = true;
      continue;
    }
    if (!greeted) {
      fail("expected HELLO first");
      return;
    }
    try {
      if (const auto* reset = std::get_if<wire::Reset>(&m)) {
        if (config && reset->config_hash != mdp::Digest::from_hex(config->hash())) {
          fail("unknown config hash " + reset->config_hash.hex());
          return;
        }
        agent.begin_episode(reset->seed);
      } else if (const auto* obs = std::get_if<wire::Observe>(&m)) {
        if (const auto* latent = std::get_if<wire::LatentObservation>(&obs->payload)) {
          if (!config) throw FormatError("latent observations need a config on the agent side");
          view.set(game::state_from_json(nlohmann::json::parse(latent->state_json), config));
        } else {
          view.set(from_wire(std::get<wire::PixelObservation>(obs->payload)));
        }
      } else if (std::holds_alternative<wire::ActRequest>(m)) {
        const auto r = agent.act(view);
        wire::Action a;
        a.action = static_cast<std::uint8_t>(r.action);
        if (channels & wire::kChannelValue) a.value = r.value;
        if (channels & wire::kChannelQ) a.q_values = r.q_values;
        if (channels & wire::kChannelEmbedding) a.embedding = r.embedding;
        send_message(stream, a);
      } else {
        fail("unexpected " + wire::type_name(wire::type_of(m)));
        return;
      }
    } catch (const nlohmann::json::exception& e) {
      fail(std::string("bad latent observation: ") + e.what());
      return;
    } catch (const TransportError&) {
      return;
    } catch (const Error& e) {
      fail(e.what());
      return;
    }
  }
}

}  // namespace intervenidar::bridge
