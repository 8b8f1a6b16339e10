#include "intervenidar/bridge/wire.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace intervenidar::bridge::wire {

namespace {

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) { be(v, 2); }
  void u32(std::uint32_t v) { be(v, 4); }
  void u64(std::uint64_t v) { be(v, 8); }
  void f64(double v) {
    if (!std::isfinite(v)) throw FormatError("wire: cannot encode a non-finite real");
    u64(std::bit_cast<std::uint64_t>(v));
  }
  void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
  void str16(const std::string& s) {
    if (s.size() > 0xFFFF) throw FormatError("wire: string too long");
    u16(static_cast<std::uint16_t>(s.size()));
    out_.insert(out_.end(), s.begin(), s.end());
  }
  void str32(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_.insert(out_.end(), s.begin(), s.end());
  }
  std::vector<std::uint8_t>& buffer() { return out_; }

 private:
  void be(std::uint64_t v, int n) {
    for (int i = n - 1; i >= 0; --i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}
  std::uint8_t u8() { return static_cast<std::uint8_t>(be(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(be(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(be(4)); }
  std::uint64_t u64() { return be(8); }
  double f64() {
    const double v = std::bit_cast<double>(u64());
    if (!std::isfinite(v)) throw FormatError("wire: non-finite real in message");
    return v;
  }
  std::span<const std::uint8_t> bytes(std::size_t n) {
    need(n);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::string str(std::size_t n) {
    auto b = bytes(n);
    return {b.begin(), b.end()};
  }
  void finish() const {
    if (pos_ != in_.size()) throw FormatError("wire: trailing bytes after message payload");
  }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw FormatError("wire: message truncated");
  }
  std::uint64_t be(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v = (v << 8) | in_[pos_++];
    return v;
  }
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

void write_reals16(Writer& w, const std::vector<double>& v) {
  if (v.size() > 0xFFFF) throw FormatError("wire: too many q-values");
  w.u16(static_cast<std::uint16_t>(v.size()));
  for (double x : v) w.f64(x);
}

void write_reals32(Writer& w, const std::vector<double>& v) {
  w.u32(static_cast<std::uint32_t>(v.size()));
  for (double x : v) w.f64(x);
}

std::vector<double> read_reals(Reader& r, std::size_t n) {
  std::vector<double> v;
  v.reserve(std::min<std::size_t>(n, 1 << 16));
  for (std::size_t i = 0; i < n; ++i) v.push_back(r.f64());
  return v;
}

}  // namespace

Type type_of(const Message& m) {
  static constexpr Type kTypes[] = {Type::kHello,      Type::kHelloAck, Type::kReset, Type::kObserve,
                                    Type::kActRequest, Type::kAction,   Type::kError, Type::kBye};
  return kTypes[m.index()];
}

std::string type_name(Type t) {
  switch (t) {
    case Type::kHello: return "HELLO";
    case Type::kHelloAck: return "HELLO_ACK";
    case Type::kReset: return "RESET";
    case Type::kObserve: return "OBSERVE";
    case Type::kActRequest: return "ACT_REQUEST";
    case Type::kAction: return "ACTION";
    case Type::kError: return "ERROR";
    case Type::kBye: return "BYE";
  }
  return "UNKNOWN";
}

std::vector<std::uint8_t> encode(const Message& m) {
  Writer w;
  w.u32(0);  // patched below
  w.u8(static_cast<std::uint8_t>(type_of(m)));
  std::visit(
      [&](const auto& msg) {
        using T = std::decay_t<decltype(msg)>;
        if constexpr (std::is_same_v<T, Hello>) {
          w.u16(msg.version);
          w.u8(msg.observations);
          w.u8(msg.channels);
        } else if constexpr (std::is_same_v<T, HelloAck>) {
          w.u16(msg.version);
          w.u8(static_cast<std::uint8_t>(msg.observation));
          w.u8(msg.channels);
          w.str16(msg.agent_id);
        } else if constexpr (std::is_same_v<T, Reset>) {
          w.bytes(msg.config_hash.bytes);
          w.u64(msg.seed);
        } else if constexpr (std::is_same_v<T, Observe>) {
          if (const auto* px = std::get_if<PixelObservation>(&msg.payload)) {
            const std::size_t expected = std::size_t{px->frames} * px->width * px->height;
            if (px->data.size() != expected) throw FormatError("wire: pixel payload size does not match header");
            w.u8(static_cast<std::uint8_t>(ObservationKind::kPixels));
            w.u16(px->width);
            w.u16(px->height);
            w.u8(px->frames);
            w.bytes(px->data);
          } else {
            w.u8(static_cast<std::uint8_t>(ObservationKind::kLatent));
            w.str32(std::get<LatentObservation>(msg.payload).state_json);
          }
        } else if constexpr (std::is_same_v<T, ActRequest>) {
          w.u64(msg.step);
        } else if constexpr (std::is_same_v<T, Action>) {
          w.u8(msg.action);
          std::uint8_t flags = 0;
          if (msg.value) flags |= kChannelValue;
          if (msg.q_values) flags |= kChannelQ;
          if (msg.embedding) flags |= kChannelEmbedding;
          w.u8(flags);
          if (msg.value) w.f64(*msg.value);
          if (msg.q_values) write_reals16(w, *msg.q_values);
          if (msg.embedding) write_reals32(w, *msg.embedding);
        } else if constexpr (std::is_same_v<T, ErrorMessage>) {
          w.str16(msg.message);
        }
      },
      m);
  auto& buf = w.buffer();
  const auto length = static_cast<std::uint32_t>(buf.size() - 4);
  if (length > kMaxFrameLength) throw FormatError("wire: message exceeds the frame size limit");
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<std::uint8_t>(length >> (8 * (3 - i)));
  return std::move(buf);
}

Message decode_body(std::span<const std::uint8_t> body) {
  Reader r(body);
  const auto type = static_cast<Type>(r.u8());
  Message out;
  switch (type) {
    case Type::kHello: {
      Hello h;
      h.version = r.u16();
      h.observations = r.u8();
      h.channels = r.u8();
      out = h;
      break;
    }
    case Type::kHelloAck: {
      HelloAck h;
      h.version = r.u16();
      const auto kind = r.u8();
      if (kind > 1) throw FormatError("wire: unknown observation kind " + std::to_string(kind));
      h.observation = static_cast<ObservationKind>(kind);
      h.channels = r.u8();
      h.agent_id = r.str(r.u16());
      out = h;
      break;
    }
    case Type::kReset: {
      Reset m;
      const auto b = r.bytes(32);
      std::copy(b.begin(), b.end(), m.config_hash.bytes.begin());
      m.seed = r.u64();
      out = m;
      break;
    }
    case Type::kObserve: {
      const auto kind = r.u8();
      if (kind == static_cast<std::uint8_t>(ObservationKind::kPixels)) {
        PixelObservation px;
        px.width = r.u16();
        px.height = r.u16();
        px.frames = r.u8();
        const auto b = r.bytes(std::size_t{px.frames} * px.width * px.height);
        px.data.assign(b.begin(), b.end());
        out = Observe{px};
      } else if (kind == static_cast<std::uint8_t>(ObservationKind::kLatent)) {
        out = Observe{LatentObservation{r.str(r.u32())}};
      } else {
        throw FormatError("wire: unknown observation kind " + std::to_string(kind));
      }
      break;
    }
    case Type::kActRequest: out = ActRequest{r.u64()}; break;
    case Type::kAction: {
      Action a;
      a.action = r.u8();
      const auto flags = r.u8();
      if (flags & ~(kChannelValue | kChannelQ | kChannelEmbedding)) throw FormatError("wire: unknown action flags");
      if (flags & kChannelValue) a.value = r.f64();
      if (flags & kChannelQ) a.q_values = read_reals(r, r.u16());
      if (flags & kChannelEmbedding) a.embedding = read_reals(r, r.u32());
      out = std::move(a);
      break;
    }
    case Type::kError: out = ErrorMessage{r.str(r.u16())}; break;
    case Type::kBye: out = Bye{}; break;
    default:
      throw FormatError("wire: unknown message type " +
                        std::to_string(static_cast<unsigned>(static_cast<std::uint8_t>(type))));
  }
  r.finish();
  return out;
}

Message decode(std::span<const std::uint8_t> frame) {
  if (frame.size() < 5) throw FormatError("wire: frame shorter than its header");
  std::uint32_t length = 0;
  for (int i = 0; i < 4; ++i) length = (length << 8) | frame[i];
  if (length > kMaxFrameLength) throw FormatError("wire: frame length exceeds limit");
  if (frame.size() - 4 != length) throw FormatError("wire: frame length prefix does not match frame size");
  return decode_body(frame.subspan(4));
}

}  // namespace intervenidar::bridge::wire
