#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "intervenidar/bridge/agent.hpp"
#include "intervenidar/mdp/digest.hpp"

// Binary agent protocol. Every message is a frame
//   u32 length (big-endian, counts the type byte and payload) | u8 type | payload
// with all integers big-endian and reals as IEEE-754 binary64 bit patterns,
// big-endian. See docs/wire-protocol.md for the byte-level layout.
namespace intervenidar::bridge::wire {

inline constexpr std::uint32_t kMaxFrameLength = 64u << 20;

enum class Type : std::uint8_t {
  kHello = 0x01,
  kHelloAck = 0x02,
  kReset = 0x03,
  kObserve = 0x04,
  kActRequest = 0x05,
  kAction = 0x06,
  kError = 0x07,
  kBye = 0x08,
};

// Channel bits used in Hello / HelloAck.
inline constexpr std::uint8_t kChannelValue = 0x01;
inline constexpr std::uint8_t kChannelQ = 0x02;
inline constexpr std::uint8_t kChannelEmbedding = 0x04;
// Observation-kind bits used in Hello.
inline constexpr std::uint8_t kOfferPixels = 0x01;
inline constexpr std::uint8_t kOfferLatent = 0x02;

// Harness -> agent: protocol version, observation kinds and channels the
// harness can handle.
struct Hello {
  std::uint16_t version = kProtocolVersion;
  std::uint8_t observations = kOfferPixels | kOfferLatent;
  std::uint8_t channels = kChannelValue | kChannelQ | kChannelEmbedding;
  bool operator==(const Hello&) const = default;
};

// Agent -> harness: the agent's version, chosen observation kind, channels it
// will fill, and its id.
struct HelloAck {
  std::uint16_t version = kProtocolVersion;
  ObservationKind observation = ObservationKind::kLatent;
  std::uint8_t channels = 0;
  std::string agent_id;
  bool operator==(const HelloAck&) const = default;
};

struct Reset {
  mdp::Digest config_hash;
  std::uint64_t seed = 0;
  bool operator==(const Reset&) const = default;
};

struct PixelObservation {
  std::uint16_t width = 0;
  std::uint16_t height = 0;
  std::uint8_t frames = 0;
  std::vector<std::uint8_t> data;  // frames * height * width, oldest first
  bool operator==(const PixelObservation&) const = default;
};

struct LatentObservation {
  std::string state_json;  // the state serialisation of state_io
  bool operator==(const LatentObservation&) const = default;
};

struct Observe {
  std::variant<PixelObservation, LatentObservation> payload;
  bool operator==(const Observe&) const = default;
};

struct ActRequest {
  std::uint64_t step = 0;
  bool operator==(const ActRequest&) const = default;
};

struct Action {
  std::uint8_t action = 0;
  std::optional<double> value;
  std::optional<std::vector<double>> q_values;
  std::optional<std::vector<double>> embedding;
  bool operator==(const Action&) const = default;
};

struct ErrorMessage {
  std::string message;
  bool operator==(const ErrorMessage&) const = default;
};

struct Bye {
  bool operator==(const Bye&) const = default;
};

using Message = std::variant<Hello, HelloAck, Reset, Observe, ActRequest, Action, ErrorMessage, Bye>;

Type type_of(const Message& m);
std::string type_name(Type t);

// Full frame, length prefix included.
std::vector<std::uint8_t> encode(const Message& m);
// Decodes one complete frame (length prefix included). Throws FormatError on
// any malformation, including trailing bytes and non-finite reals.
Message decode(std::span<const std::uint8_t> frame);
// Decodes the type byte and payload of a frame whose prefix was already read.
Message decode_body(std::span<const std::uint8_t> body);

}  // namespace intervenidar::bridge::wire
