#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <random>

namespace yardsale {

/// xoshiro256++ (Blackman & Vigna). Satisfies UniformRandomBitGenerator;
/// several times faster than std::mt19937_64 in the exchange loop, where
/// three draws are spent per bet.
class Xoshiro256pp {
 public:
  using result_type = std::uint64_t;

  /// State words are filled from a std::seed_seq, whose output is fixed by
  /// the standard.
  explicit Xoshiro256pp(std::seed_seq& seq) {
    std::array<std::uint32_t, 8> words{};
    seq.generate(words.begin(), words.end());
    for (int k = 0; k < 4; ++k)
      s_[k] = (static_cast<std::uint64_t>(words[2 * k]) << 32) | words[2 * k + 1];
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  friend bool operator==(const Xoshiro256pp&, const Xoshiro256pp&) = default;

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }
  std::array<std::uint64_t, 4> s_{};
};

/// Engine used for every stochastic draw in the library. Derived draws
/// below avoid the implementation-defined std::*_distribution types, so runs
/// are bit-reproducible across toolchains.
using Rng = Xoshiro256pp;

/// Independent stream for history `history` of experiment `seed`.
inline Rng make_stream(std::uint64_t seed, std::uint64_t history = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(history),
                    static_cast<std::uint32_t>(history >> 32), 0x59534d43u};
  return Rng(seq);
}

namespace detail {
__extension__ typedef unsigned __int128 uint128;
}  // namespace detail

/// Uniform integer in [0, n). n must be positive. Lemire's multiply-shift
/// with rejection; unbiased.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  detail::uint128 m = static_cast<detail::uint128>(rng()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      m = static_cast<detail::uint128>(rng()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

}  // namespace yardsale
