#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <string_view>

namespace bosoncert {

/// SplitMix64 step (Steele, Lea, Flood). Advances `state` and returns the mixed output.
std::uint64_t splitmix64(std::uint64_t& state);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::span<const unsigned char> bytes,
                      std::uint64_t basis = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a64(std::string_view text);

/// xoshiro256** 1.0 (Blackman, Vigna), seeded through SplitMix64.
///
/// Campaign workers never share a generator: each (master seed, run index,
/// role tag) triple derives its own stream via `Rng::stream`.
class Rng {
public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed);
  static Rng stream(std::uint64_t master_seed, std::uint64_t index, std::string_view role);
  /// The 64-bit key `stream` seeds from; exposed so artifacts can record it.
  static std::uint64_t stream_key(std::uint64_t master_seed, std::uint64_t index,
                                  std::string_view role);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, n), rejection from the next power of two.
  std::uint64_t below(std::uint64_t n);
  /// Standard normal via Box-Muller (cosine branch only).
  double normal();

private:
  std::array<std::uint64_t, 4> s_{};
};

}  // namespace bosoncert
