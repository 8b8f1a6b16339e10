#include "intervenidar/bridge/transport.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <mutex>
#include <sstream>

namespace intervenidar::bridge {

namespace {

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

std::uint32_t be32(const std::uint8_t* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | p[3];
}

}  // namespace

FdStream::FdStream(int read_fd, int write_fd) : read_fd_(read_fd), write_fd_(write_fd) { ignore_sigpipe(); }

FdStream::~FdStream() {
  if (read_fd_ >= 0) ::close(read_fd_);
  if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
}

void FdStream::write_all(std::span<const std::uint8_t> data) {
  std::size_t done = 0;
  while (done < data.size()) {
    const ssize_t n = ::write(write_fd_, data.data() + done, data.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TransportError(errno_text("write"));
    }
    done += static_cast<std::size_t>(n);
  }
}

void FdStream::read_exact(std::span<std::uint8_t> data, Millis timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  std::size_t done = 0;
  while (done < data.size()) {
    const auto left = std::chrono::duration_cast<Millis>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) throw TimeoutError("agent did not respond within " + std::to_string(timeout.count()) + " ms");
    pollfd p{read_fd_, POLLIN, 0};
    const int r = ::poll(&p, 1, static_cast<int>(left.count()));
    if (r < 0) {
      if (errno == EINTR) continue;
      throw TransportError(errno_text("poll"));
    }
    if (r == 0) continue;  // loop re-checks the deadline
    const ssize_t n = ::read(read_fd_, data.data() + done, data.size() - done);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      throw TransportError(errno_text("read"));
    }
    if (n == 0) throw TransportError("connection closed by peer");
    done += static_cast<std::size_t>(n);
  }
}

bool FdStream::wait_readable(Millis timeout) {
  pollfd p{read_fd_, POLLIN, 0};
  for (;;) {
    const int r = ::poll(&p, 1, static_cast<int>(timeout.count()));
    if (r < 0 && errno == EINTR) continue;
    if (r < 0) throw TransportError(errno_text("poll"));
    return r > 0;
  }
}

void FdStream::shutdown() {
  ::shutdown(read_fd_, SHUT_RDWR);
  if (write_fd_ != read_fd_) ::shutdown(write_fd_, SHUT_RDWR);
}

ChildProcessStream::Spawned ChildProcessStream::spawn(const std::string& command) {
  int to_child[2];
  int from_child[2];
  if (::pipe(to_child) != 0) throw TransportError(errno_text("pipe"));
  if (::pipe(from_child) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw TransportError(errno_text("pipe"));
  }
  const pid_t pid = ::fork();
  if (pid < 0) throw TransportError(errno_text("fork"));
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::close(to_child[0]);
    ::close(to_child[1]);
    ::close(from_child[0]);
    ::close(from_child[1]);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  ::fcntl(from_child[0], F_SETFD, FD_CLOEXEC);
  ::fcntl(to_child[1], F_SETFD, FD_CLOEXEC);
  return {from_child[0], to_child[1], pid};
}

ChildProcessStream::ChildProcessStream(const std::string& command) : ChildProcessStream(spawn(command)) {}

ChildProcessStream::~ChildProcessStream() {
  ::kill(pid_, SIGTERM);
  int status = 0;
  ::waitpid(pid_, &status, 0);
}

std::pair<std::unique_ptr<Stream>, std::unique_ptr<Stream>> stream_pair() {
  int fds[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, fds) != 0) throw TransportError(errno_text("socketpair"));
  return {std::make_unique<FdStream>(fds[0], fds[0]), std::make_unique<FdStream>(fds[1], fds[1])};
}

std::unique_ptr<Stream> connect_tcp(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* result = nullptr;
  const std::string service = std::to_string(port);
  if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &result); rc != 0) {
    throw TransportError("cannot resolve " + host + ": " + ::gai_strerror(rc));
  }
  int fd = -1;
  for (addrinfo* a = result; a; a = a->ai_next) {
    fd = ::socket(a->ai_family, a->ai_socktype | SOCK_CLOEXEC, a->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, a->ai_addr, a->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(result);
  if (fd < 0) throw TransportError("cannot connect to " + host + ":" + service);
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return std::make_unique<FdStream>(fd, fd);
}

TcpListener::TcpListener(std::uint16_t port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd_ < 0) throw TransportError(errno_text("socket"));
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(fd_, 16) != 0) {
    const std::string err = errno_text("bind/listen");
    ::close(fd_);
    throw TransportError(err);
  }
  socklen_t len = sizeof addr;
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() { ::close(fd_); }

void TcpListener::shutdown() { ::shutdown(fd_, SHUT_RDWR); }

std::unique_ptr<Stream> TcpListener::accept() {
  for (;;) {
    const int fd = ::accept4(fd_, nullptr, nullptr, SOCK_CLOEXEC);
    if (fd >= 0) {
      int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      return std::make_unique<FdStream>(fd, fd);
    }
    if (errno != EINTR) throw TransportError(errno_text("accept"));
  }
}

void send_message(Stream& stream, const wire::Message& message) { stream.write_all(wire::encode(message)); }

wire::Message receive_message(Stream& stream, Millis timeout) {
  std::uint8_t header[4];
  stream.read_exact(header, timeout);
  const std::uint32_t length = be32(header);
  if (length == 0 || length > wire::kMaxFrameLength) throw FormatError("wire: bad frame length " + std::to_string(length));
  std::vector<std::uint8_t> body(length);
  stream.read_exact(body, timeout);
  return wire::decode_body(body);
}

void RecordingStream::record(bool outgoing, std::span<const std::uint8_t> data) {
  if (outgoing) {
    frames_.push_back({true, {data.begin(), data.end()}});
    return;
  }
  pending_in_.insert(pending_in_.end(), data.begin(), data.end());
  while (pending_in_.size() >= 4) {
    const std::size_t total = 4 + std::size_t{be32(pending_in_.data())};
    if (pending_in_.size() < total) break;
    frames_.push_back({false, {pending_in_.begin(), pending_in_.begin() + static_cast<std::ptrdiff_t>(total)}});
    pending_in_.erase(pending_in_.begin(), pending_in_.begin() + static_cast<std::ptrdiff_t>(total));
  }
}

void RecordingStream::write_all(std::span<const std::uint8_t> data) {
  inner_.write_all(data);
  record(true, data);
}

void RecordingStream::read_exact(std::span<std::uint8_t> data, Millis timeout) {
  inner_.read_exact(data, timeout);
  record(false, data);
}

std::string write_transcript(const std::vector<RecordingStream::Frame>& frames) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (const auto& f : frames) {
    out += f.outgoing ? "> " : "< ";
    out += wire::type_name(wire::type_of(wire::decode(f.bytes)));
    out += ' ';
    for (std::uint8_t b : f.bytes) {
      out += kHex[b >> 4];
      out += kHex[b & 15];
    }
    out += '\n';
  }
  return out;
}

std::vector<RecordingStream::Frame> parse_transcript(const std::string& text) {
  std::vector<RecordingStream::Frame> frames;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string dir, type, hex;
    if (!(fields >> dir >> type >> hex) || (dir != ">" && dir != "<") || hex.size() % 2 != 0) {
      throw FormatError("transcript line " + std::to_string(line_no) + " is malformed");
    }
    RecordingStream::Frame f;
    f.outgoing = dir == ">";
    for (std::size_t i = 0; i < hex.size(); i += 2) {
      auto nibble = [&](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        throw FormatError("transcript line " + std::to_string(line_no) + " has a bad hex digit");
      };
      f.bytes.push_back(static_cast<std::uint8_t>(nibble(hex[i]) * 16 + nibble(hex[i + 1])));
    }
    if (wire::type_name(wire::type_of(wire::decode(f.bytes))) != type) {
      throw FormatError("transcript line " + std::to_string(line_no) + ": type label does not match frame");
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

}  // namespace intervenidar::bridge
