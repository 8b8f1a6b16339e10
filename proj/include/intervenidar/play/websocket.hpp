#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "intervenidar/bridge/transport.hpp"

// Minimal RFC 6455 endpoint: text messages, fragmentation, ping/pong, close.
// Enough for a browser client talking JSON; no extensions, no subprotocols.
namespace intervenidar::play::ws {

class WebSocketError : public Error {
 public:
  using Error::Error;
};

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(const std::string& text);

// Sec-WebSocket-Accept value for a client's Sec-WebSocket-Key.
std::string accept_key(const std::string& client_key);

enum class Opcode : std::uint8_t {
  kContinuation = 0x0,
  kText = 0x1,
  kBinary = 0x2,
  kClose = 0x8,
  kPing = 0x9,
  kPong = 0xA,
};

// A message-oriented WebSocket over a byte stream. Clients mask what they
// send, servers do not; received frames must follow the opposite rule.
class Connection {
 public:
  Connection(std::unique_ptr<bridge::Stream> stream, bool client_side);

  void send_text(const std::string& text);
  void send_close(std::uint16_t code = 1000);
  // Next complete text message; answers pings, skips pongs. nullopt when
  // the peer closes (the close is acknowledged).
  std::optional<std::string> receive_text(bridge::Millis timeout);
  bool wait_readable(bridge::Millis timeout) { return stream_->wait_readable(timeout); }

 private:
  void send_frame(Opcode op, std::span<const std::uint8_t> payload);
  bridge::Stream& stream() { return *stream_; }

  std::unique_ptr<bridge::Stream> stream_;
  bool client_side_;
  std::uint32_t mask_state_ = 0x9e3779b9u;
  bool close_sent_ = false;
};

// Upgraded server-side connection, or the plain HTTP request when the peer
// did not ask for a WebSocket (the caller answers it).
struct Accepted {
  std::unique_ptr<Connection> connection;
  std::string method;
  std::string path;
  std::unique_ptr<bridge::Stream> plain;  // set when not upgraded
};

// Reads the HTTP request and, for a valid upgrade, completes the handshake.
// Throws WebSocketError on a malformed request.
Accepted accept(std::unique_ptr<bridge::Stream> stream, bridge::Millis timeout = bridge::kDefaultTimeout);

// Writes a minimal HTTP/1.1 response and leaves the stream to be closed.
void write_http_response(bridge::Stream& stream, int status, const std::string& reason,
                         const std::string& content_type, const std::string& body);

// Client handshake (used by tests and tooling).
std::unique_ptr<Connection> connect(const std::string& host, std::uint16_t port, const std::string& path = "/",
                                    bridge::Millis timeout = bridge::kDefaultTimeout);

}  // namespace intervenidar::play::ws
