#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace lrs {

// Deterministic seeded generator used throughout the library.
//
// Algorithm: xoshiro256** (Blackman/Vigna), state initialized by four
// consecutive outputs of splitmix64 applied to a mixed root seed. A stream is
// identified by (seed, label, index): the label is hashed with 64-bit FNV-1a
// and folded into the root via splitmix64 steps, so every module can derive
// independent substreams from one master seed. Derivation depends only on the
// root seed, never on how far the parent stream has advanced, which keeps
// per-trial streams reproducible under any thread partitioning.
//
// Bounded draws use rejection from the top of the 64-bit output, so results
// are exactly uniform and identical on every platform. <random> distributions
// are deliberately not used: their output is implementation-defined.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : root_(seed) { init_state(seed); }

  SeededRng(std::uint64_t seed, std::string_view label)
      : SeededRng(mix(seed, fnv1a(label))) {}

  // Independent substream addressed by (root seed, label).
  [[nodiscard]] SeededRng derive(std::string_view label) const {
    return SeededRng(mix(root_, fnv1a(label)));
  }

  // Independent substream addressed by (root seed, label, index). Used for
  // per-trial streams in Monte Carlo loops.
  [[nodiscard]] SeededRng derive(std::string_view label, std::uint64_t index) const {
    return SeededRng(mix(mix(root_, fnv1a(label)), splitmix64_step(index)));
  }

  [[nodiscard]] std::uint64_t root_seed() const { return root_; }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform draw from [0, bound). bound must be >= 1.
  std::uint64_t uniform_below(std::uint64_t bound) {
    // Rejection from the largest multiple of bound below 2^64.
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  static constexpr std::uint64_t splitmix64_step(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  static constexpr std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    return splitmix64_step(splitmix64_step(a) ^ b);
  }

  static constexpr std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
    return h;
  }

  void init_state(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& w : s_) {
      x += 0x9e3779b97f4a7c15ULL;
      std::uint64_t z = x;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      w = z ^ (z >> 31);
    }
    // xoshiro requires a nonzero state; splitmix cannot emit four zeros in a
    // row, but guard anyway.
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
  }

  std::array<std::uint64_t, 4> s_{};
  std::uint64_t root_;
};

}  // namespace lrs
