#include "intervenidar/mdp/digest.hpp"

#include <openssl/evp.h>

#include <stdexcept>

#include "intervenidar/mdp/error.hpp"

namespace intervenidar::mdp {

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::string Digest::hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(64);
  for (auto b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

Digest Digest::from_hex(std::string_view hex) {
  if (hex.size() != 64) throw FormatError("digest must be 64 hex characters, got " + std::to_string(hex.size()));
  Digest d;
  for (std::size_t i = 0; i < 32; ++i) {
    const int hi = hex_value(hex[2 * i]);
    const int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw FormatError("digest contains a non-hex character");
    d.bytes[i] = static_cast<std::uint8_t>(hi * 16 + lo);
  }
  return d;
}

struct DigestBuilder::Impl {
  EVP_MD_CTX* ctx = nullptr;
};

DigestBuilder::DigestBuilder() : impl_(std::make_unique<Impl>()) {
  impl_->ctx = EVP_MD_CTX_new();
  if (impl_->ctx == nullptr || EVP_DigestInit_ex(impl_->ctx, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("EVP sha256 init failed");
  }
}

DigestBuilder::~DigestBuilder() {
  if (impl_ && impl_->ctx) EVP_MD_CTX_free(impl_->ctx);
}

DigestBuilder& DigestBuilder::bytes(std::span<const std::uint8_t> data) {
  if (!data.empty()) EVP_DigestUpdate(impl_->ctx, data.data(), data.size());
  return *this;
}

DigestBuilder& DigestBuilder::u8(std::uint8_t v) { return bytes(std::span(&v, 1)); }

DigestBuilder& DigestBuilder::u32(std::uint32_t v) {
  std::uint8_t b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
  return bytes(b);
}

DigestBuilder& DigestBuilder::u64(std::uint64_t v) {
  std::uint8_t b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
  return bytes(b);
}

DigestBuilder& DigestBuilder::str(std::string_view s) {
  u64(s.size());
  return bytes(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

Digest DigestBuilder::finish() {
  Digest d;
  unsigned int len = 0;
  EVP_DigestFinal_ex(impl_->ctx, d.bytes.data(), &len);
  EVP_DigestInit_ex(impl_->ctx, EVP_sha256(), nullptr);
  return d;
}

Digest sha256(std::span<const std::uint8_t> data) {
  DigestBuilder b;
  b.bytes(data);
  return b.finish();
}

Digest sha256(std::string_view text) {
  return sha256(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace intervenidar::mdp
