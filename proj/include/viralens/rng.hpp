#pragma once

#include <cstdint>
#include <string_view>

namespace viralens {

/// SplitMix64 finalizer; used both to derive child seeds and as a cheap hash.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// FNV-1a, stable across platforms (std::hash is not).
constexpr std::uint64_t hash_string(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Splittable seeded generator (xoshiro256**). All randomness in the
/// library flows through instances derived from a single user seed with
/// split(), so results never depend on call order across components.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept;

  /// Independent child stream keyed by `key`; does not advance *this.
  Rng split(std::uint64_t key) const noexcept;
  Rng split(std::string_view key) const noexcept { return split(hash_string(key)); }

  std::uint64_t next() noexcept;
  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform() noexcept;
  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n) noexcept;
  double gamma(double shape) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t s_[4];
};

}  // namespace viralens
