#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <string_view>

namespace bpft {

namespace detail {

inline constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

/// Deterministic random stream identified by a 64-bit key.
///
/// Forking derives a child key from the parent key and a label only, never
/// from the draws already consumed. Two planners that fork the same labels at
/// the same tree positions therefore see identical randomness regardless of
/// any extra work one of them performs in between.
class SeededStream {
 public:
  using result_type = std::uint64_t;

  explicit SeededStream(std::uint64_t seed) : key_(detail::splitmix64(seed)), engine_(key_) {}

  [[nodiscard]] SeededStream fork(std::string_view label) const {
    return SeededStream(Key{detail::splitmix64(key_ ^ detail::fnv1a64(label))});
  }

  [[nodiscard]] SeededStream fork(std::string_view label, std::uint64_t index) const {
    const std::uint64_t mixed = detail::splitmix64(detail::fnv1a64(label) + 0x9e3779b97f4a7c15ULL * (index + 1));
    return SeededStream(Key{detail::splitmix64(key_ ^ mixed)});
  }

  [[nodiscard]] std::uint64_t key() const noexcept { return key_; }

  static constexpr result_type min() noexcept { return std::mt19937_64::min(); }
  static constexpr result_type max() noexcept { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform draw in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() { return normal_(engine_); }

  /// Uniform index in [0, n); n must be positive.
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }

 private:
  struct Key {
    std::uint64_t value;
  };
  explicit SeededStream(Key k) : key_(k.value), engine_(key_) {}

  std::uint64_t key_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace bpft
