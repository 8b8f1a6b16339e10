#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>

namespace intervenidar::mdp {

// 256-bit SHA-256 digest of a canonical serialization.
struct Digest {
  std::array<std::uint8_t, 32> bytes{};

  std::string hex() const;
  static Digest from_hex(std::string_view hex);

  auto operator<=>(const Digest&) const = default;
};

Digest sha256(std::span<const std::uint8_t> data);
Digest sha256(std::string_view text);

// Incremental hasher with fixed-width little-endian encoders, used to build
// canonical latent-state digests without materialising the byte string.
class DigestBuilder {
 public:
  DigestBuilder();
  ~DigestBuilder();
  DigestBuilder(const DigestBuilder&) = delete;
  DigestBuilder& operator=(const DigestBuilder&) = delete;

  DigestBuilder& bytes(std::span<const std::uint8_t> data);
  DigestBuilder& u8(std::uint8_t v);
  DigestBuilder& u32(std::uint32_t v);
  DigestBuilder& u64(std::uint64_t v);
  DigestBuilder& i32(std::int32_t v) { return u32(static_cast<std::uint32_t>(v)); }
  // Length-prefixed.
  DigestBuilder& str(std::string_view s);

  Digest finish();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace intervenidar::mdp

template <>
struct std::hash<intervenidar::mdp::Digest> {
  std::size_t operator()(const intervenidar::mdp::Digest& d) const noexcept {
    std::size_t h = 0;
    for (int i = 0; i < 8; ++i) h = (h << 8) | d.bytes[i];
    return h;
  }
};
