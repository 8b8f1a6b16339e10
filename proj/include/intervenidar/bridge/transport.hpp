#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <sys/types.h>

#include "intervenidar/bridge/wire.hpp"

namespace intervenidar::bridge {

using Millis = std::chrono::milliseconds;
inline constexpr Millis kDefaultTimeout{5000};

// Raised when a read does not complete within its deadline.
class TimeoutError : public AgentError {
 public:
  using AgentError::AgentError;
};

// Raised when the peer closes the connection or the descriptor fails.
class TransportError : public AgentError {
 public:
  using AgentError::AgentError;
};

// A bidirectional byte stream over file descriptors (socket, pipe pair).
class Stream {
 public:
  virtual ~Stream() = default;
  virtual void write_all(std::span<const std::uint8_t> data) = 0;
  // Reads exactly data.size() bytes or throws TimeoutError / TransportError.
  virtual void read_exact(std::span<std::uint8_t> data, Millis timeout) = 0;
  // True once input (or end of stream) is pending; false after `timeout`.
  virtual bool wait_readable(Millis timeout) = 0;
};

class FdStream : public Stream {
 public:
  // Takes ownership of the descriptors; read_fd may equal write_fd.
  FdStream(int read_fd, int write_fd);
  ~FdStream() override;
  FdStream(const FdStream&) = delete;
  FdStream& operator=(const FdStream&) = delete;

  void write_all(std::span<const std::uint8_t> data) override;
  void read_exact(std::span<std::uint8_t> data, Millis timeout) override;
  bool wait_readable(Millis timeout) override;
  // Stops further reads and writes; a blocked peer sees end of stream.
  void shutdown();

 private:
  int read_fd_;
  int write_fd_;
};

// Runs `/bin/sh -c command` with its stdin/stdout connected to the stream.
// The child is terminated when the stream is destroyed.
class ChildProcessStream : public FdStream {
 public:
  explicit ChildProcessStream(const std::string& command);
  ~ChildProcessStream() override;
  pid_t pid() const { return pid_; }

 private:
  struct Spawned {
    int read_fd;
    int write_fd;
    pid_t pid;
  };
  explicit ChildProcessStream(Spawned s) : FdStream(s.read_fd, s.write_fd), pid_(s.pid) {}
  static Spawned spawn(const std::string& command);
  pid_t pid_;
};

// Connected pair of in-process endpoints (AF_UNIX socketpair).
std::pair<std::unique_ptr<Stream>, std::unique_ptr<Stream>> stream_pair();

std::unique_ptr<Stream> connect_tcp(const std::string& host, std::uint16_t port);

class TcpListener {
 public:
  // Binds to 127.0.0.1; port 0 picks a free port.
  explicit TcpListener(std::uint16_t port);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const { return port_; }
  std::unique_ptr<Stream> accept();
  // Wakes a thread blocked in accept(), which then throws TransportError.
  void shutdown();

 private:
  int fd_;
  std::uint16_t port_;
};

void send_message(Stream& stream, const wire::Message& message);
wire::Message receive_message(Stream& stream, Millis timeout = kDefaultTimeout);

// Wraps a stream and appends every frame that passes through it to a
// transcript (direction, type, hex bytes) — see write_transcript.
class RecordingStream : public Stream {
 public:
  struct Frame {
    bool outgoing = false;
    std::vector<std::uint8_t> bytes;
  };

  explicit RecordingStream(Stream& inner) : inner_(inner) {}
  void write_all(std::span<const std::uint8_t> data) override;
  void read_exact(std::span<std::uint8_t> data, Millis timeout) override;
  bool wait_readable(Millis timeout) override { return inner_.wait_readable(timeout); }
  const std::vector<Frame>& frames() const { return frames_; }

 private:
  void record(bool outgoing, std::span<const std::uint8_t> data);
  Stream& inner_;
  std::vector<Frame> frames_;
  std::vector<std::uint8_t> pending_in_;
};

// Text transcript: one frame per line, "> " for frames sent by the
// recording side and "< " for frames received, followed by the type name and
// the frame as lowercase hex.
std::string write_transcript(const std::vector<RecordingStream::Frame>& frames);
std::vector<RecordingStream::Frame> parse_transcript(const std::string& text);

}  // namespace intervenidar::bridge
