#include "intervenidar/play/websocket.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <map>

namespace intervenidar::play::ws {

namespace {

constexpr char kGuid[] = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11";
constexpr std::size_t kMaxHeaderBytes = 16 * 1024;
constexpr std::uint64_t kMaxMessageBytes = 4 * 1024 * 1024;

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

bool has_token(const std::string& value, const std::string& token) {
  std::size_t start = 0;
  while (start <= value.size()) {
    const auto comma = value.find(',', start);
    const auto piece = trim(value.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (lower(piece) == token) return true;
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return false;
}

struct HttpHead {
  std::string start_line;
  std::map<std::string, std::string> headers;  // lower-cased names
};

HttpHead read_head(bridge::Stream& stream, bridge::Millis timeout) {
  std::string raw;
  while (raw.size() < 4 || raw.compare(raw.size() - 4, 4, "\r\n\r\n") != 0) {
    if (raw.size() >= kMaxHeaderBytes) throw WebSocketError("http header too large");
    std::uint8_t c;
    stream.read_exact({&c, 1}, timeout);
    raw.push_back(static_cast<char>(c));
  }
  HttpHead head;
  std::size_t pos = raw.find("\r\n");
  head.start_line = raw.substr(0, pos);
  pos += 2;
  while (pos < raw.size() - 2) {
    const auto end = raw.find("\r\n", pos);
    const auto line = raw.substr(pos, end - pos);
    pos = end + 2;
    const auto colon = line.find(':');
    if (colon == std::string::npos) throw WebSocketError("malformed http header line");
    head.headers[lower(trim(line.substr(0, colon)))] = trim(line.substr(colon + 1));
  }
  return head;
}

void write_string(bridge::Stream& stream, const std::string& s) {
  stream.write_all({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
}

}  // namespace

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(), static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
  if (text.size() % 4 != 0) throw WebSocketError("base64 length is not a multiple of 4");
  std::vector<std::uint8_t> out(text.size() / 4 * 3);
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()), static_cast<int>(text.size()));
  if (n < 0) throw WebSocketError("invalid base64");
  std::size_t size = static_cast<std::size_t>(n);
  // EVP_DecodeBlock keeps the bytes produced by '=' padding.
  if (!text.empty() && text.back() == '=') --size;
  if (text.size() >= 2 && text[text.size() - 2] == '=') --size;
  out.resize(size);
  return out;
}

std::string accept_key(const std::string& client_key) {
  const std::string material = client_key + kGuid;
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(material.data(), material.size(), digest, &len, EVP_sha1(), nullptr) != 1) {
    throw WebSocketError("sha1 failed");
  }
  return base64_encode({digest, len});
}

Connection::Connection(std::unique_ptr<bridge::Stream> stream, bool client_side)
    : stream_(std::move(stream)), client_side_(client_side) {}

void Connection::send_frame(Opcode op, std::span<const std::uint8_t> payload) {
  std::vector<std::uint8_t> out;
  out.reserve(payload.size() + 14);
  out.push_back(static_cast<std::uint8_t>(0x80 | static_cast<std::uint8_t>(op)));
  const std::uint8_t mask_bit = client_side_ ? 0x80 : 0x00;
  const std::uint64_t n = payload.size();
  if (n < 126) {
    out.push_back(static_cast<std::uint8_t>(mask_bit | n));
  } else if (n <= 0xFFFF) {
    out.push_back(mask_bit | 126);
    out.push_back(static_cast<std::uint8_t>(n >> 8));
    out.push_back(static_cast<std::uint8_t>(n));
  } else {
    out.push_back(mask_bit | 127);
    for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(n >> shift));
  }
  std::uint8_t mask[4] = {0, 0, 0, 0};
  if (client_side_) {
    // xorshift is plenty: masking only defeats proxy cache poisoning.
    mask_state_ ^= mask_state_ << 13;
    mask_state_ ^= mask_state_ >> 17;
    mask_state_ ^= mask_state_ << 5;
    for (int i = 0; i < 4; ++i) mask[i] = static_cast<std::uint8_t>(mask_state_ >> (8 * i));
    out.insert(out.end(), mask, mask + 4);
  }
  for (std::size_t i = 0; i < payload.size(); ++i) out.push_back(payload[i] ^ mask[i % 4]);
  stream().write_all(out);
}

void Connection::send_text(const std::string& text) {
  send_frame(Opcode::kText, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

void Connection::send_close(std::uint16_t code) {
  if (close_sent_) return;
  close_sent_ = true;
  const std::uint8_t body[2] = {static_cast<std::uint8_t>(code >> 8), static_cast<std::uint8_t>(code)};
  try {
    send_frame(Opcode::kClose, body);
  } catch (const bridge::TransportError&) {
    // peer already gone
  }
}

std::optional<std::string> Connection::receive_text(bridge::Millis timeout) {
  std::string message;
  bool in_message = false;
  for (;;) {
    std::uint8_t head[2];
    stream().read_exact(head, timeout);
    const bool fin = head[0] & 0x80;
    if (head[0] & 0x70) throw WebSocketError("reserved bits set without a negotiated extension");
    const auto op = static_cast<Opcode>(head[0] & 0x0F);
    const bool masked = head[1] & 0x80;
    if (masked == client_side_) throw WebSocketError(client_side_ ? "server frame is masked" : "client frame is not masked");
    std::uint64_t len = head[1] & 0x7F;
    if (len == 126) {
      std::uint8_t ext[2];
      stream().read_exact(ext, timeout);
      len = (std::uint64_t{ext[0]} << 8) | ext[1];
    } else if (len == 127) {
      std::uint8_t ext[8];
      stream().read_exact(ext, timeout);
      len = 0;
      for (std::uint8_t b : ext) len = (len << 8) | b;
    }
    const bool control = static_cast<std::uint8_t>(op) & 0x8;
    if (control && (len > 125 || !fin)) throw WebSocketError("invalid control frame");
    if (len > kMaxMessageBytes || message.size() + len > kMaxMessageBytes) throw WebSocketError("message too large");
    std::uint8_t mask[4] = {0, 0, 0, 0};
    if (masked) stream().read_exact(mask, timeout);
    std::vector<std::uint8_t> payload(static_cast<std::size_t>(len));
    if (len) stream().read_exact(payload, timeout);
    for (std::size_t i = 0; i < payload.size(); ++i) payload[i] ^= mask[i % 4];

    switch (op) {
      case Opcode::kPing:
        send_frame(Opcode::kPong, payload);
        continue;
      case Opcode::kPong:
        continue;
      case Opcode::kClose: {
        std::uint16_t code = 1000;
        if (payload.size() >= 2) code = static_cast<std::uint16_t>((payload[0] << 8) | payload[1]);
        send_close(code);
        return std::nullopt;
      }
      case Opcode::kText:
      case Opcode::kBinary:
        if (in_message) throw WebSocketError("new data frame inside a fragmented message");
        if (op == Opcode::kBinary) throw WebSocketError("binary messages are not supported");
        in_message = true;
        break;
      case Opcode::kContinuation:
        if (!in_message) throw WebSocketError("continuation frame without a message");
        break;
      default:
        throw WebSocketError("unknown opcode " + std::to_string(static_cast<int>(op)));
    }
    message.append(payload.begin(), payload.end());
    if (fin) return message;
  }
}

Accepted accept(std::unique_ptr<bridge::Stream> stream, bridge::Millis timeout) {
  const HttpHead head = read_head(*stream, timeout);
  Accepted result;
  const auto sp1 = head.start_line.find(' ');
  const auto sp2 = head.start_line.find(' ', sp1 + 1);
  if (sp1 == std::string::npos || sp2 == std::string::npos) throw WebSocketError("malformed http request line");
  result.method = head.start_line.substr(0, sp1);
  result.path = head.start_line.substr(sp1 + 1, sp2 - sp1 - 1);

  auto header = [&](const char* name) -> std::string {
    const auto it = head.headers.find(name);
    return it == head.headers.end() ? std::string{} : it->second;
  };
  const bool upgrade = lower(header("upgrade")) == "websocket" && has_token(header("connection"), "upgrade");
  if (!upgrade) {
    result.plain = std::move(stream);
    return result;
  }
  const std::string key = header("sec-websocket-key");
  if (result.method != "GET" || key.empty() || header("sec-websocket-version") != "13") {
    write_http_response(*stream, 400, "Bad Request", "text/plain", "websocket version 13 with a key is required\n");
    throw WebSocketError("bad websocket upgrade request");
  }
  write_string(*stream, "HTTP/1.1 101 Switching Protocols\r\n"
                        "Upgrade: websocket\r\n"
                        "Connection: Upgrade\r\n"
                        "Sec-WebSocket-Accept: " + accept_key(key) + "\r\n\r\n");
  result.connection = std::make_unique<Connection>(std::move(stream), false);
  return result;
}

void write_http_response(bridge::Stream& stream, int status, const std::string& reason,
                         const std::string& content_type, const std::string& body) {
  write_string(stream, "HTTP/1.1 " + std::to_string(status) + " " + reason + "\r\n"
                       "Content-Type: " + content_type + "\r\n"
                       "Content-Length: " + std::to_string(body.size()) + "\r\n"
                       "Connection: close\r\n\r\n" + body);
}

std::unique_ptr<Connection> connect(const std::string& host, std::uint16_t port, const std::string& path,
                                    bridge::Millis timeout) {
  auto stream = bridge::connect_tcp(host, port);
  const std::uint8_t nonce[16] = {'i', 'n', 't', 'e', 'r', 'v', 'e', 'n', 'i', 'd', 'a', 'r', 'k', 'e', 'y', '!'};
  const std::string key = base64_encode(nonce);
  write_string(*stream, "GET " + path + " HTTP/1.1\r\n"
                        "Host: " + host + ":" + std::to_string(port) + "\r\n"
                        "Upgrade: websocket\r\n"
                        "Connection: Upgrade\r\n"
                        "Sec-WebSocket-Key: " + key + "\r\n"
                        "Sec-WebSocket-Version: 13\r\n\r\n");
  const HttpHead head = read_head(*stream, timeout);
  if (head.start_line.rfind("HTTP/1.1 101", 0) != 0) throw WebSocketError("upgrade refused: " + head.start_line);
  const auto it = head.headers.find("sec-websocket-accept");
  if (it == head.headers.end() || it->second != accept_key(key)) throw WebSocketError("bad Sec-WebSocket-Accept");
  return std::make_unique<Connection>(std::move(stream), true);
}

}  // namespace intervenidar::play::ws
