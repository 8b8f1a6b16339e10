#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace intervenidar::mdp {

// Mixes a top-level seed with a role tag ("env", "agent", "intervention",
// "kopa", ...). Streams derived with different tags are independent, so adding
// draws in one role never shifts another role's sequence.
//
// seed' = splitmix64(seed ^ fnv1a64(tag))
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag);

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view bytes);

// Seedable random stream with a fixed algorithm: std::mt19937_64, whose raw
// output sequence is pinned by the C++ standard. Bounded integers use
// rejection sampling on the raw 64-bit words and reals use the top 53 bits, so
// no implementation-defined std::*_distribution is involved and draws are
// identical on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  static Rng derived(std::uint64_t seed, std::string_view tag) {
    return Rng(derive_seed(seed, tag));
  }

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, bound). bound must be > 0.
  std::uint64_t uniform_below(std::uint64_t bound);

  // Uniform on [lo, hi], inclusive.
  int uniform_int(int lo, int hi);

  // Uniform on [0, 1).
  double uniform01();

  template <class T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace intervenidar::mdp
