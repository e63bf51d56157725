#pragma once

// Reproducible random streams.
//
// Each (seed, stream) pair selects an independent xoshiro256** sequence whose
// state is expanded from the pair by splitmix64. Output is a pure function of
// the pair on every platform, so golden files and cross-worker runs agree
// bit for bit. Bump kRngIdentity if the derivation ever changes.

#include <array>
#include <cstdint>
#include <limits>

namespace zmgx {

inline constexpr const char* kRngIdentity = "xoshiro256starstar-splitmix64/1";

struct RngSpec {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

inline constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t state) : state_(state) {}
  constexpr std::uint64_t operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return splitmix64_mix(state_);
  }

 private:
  std::uint64_t state_;
};

// Satisfies std::uniform_random_bit_generator.
class Xoshiro256ss {
 public:
  using result_type = std::uint64_t;

  explicit constexpr Xoshiro256ss(const std::array<std::uint64_t, 4>& state) : s_(state) {}

  explicit constexpr Xoshiro256ss(RngSpec spec) : s_{} {
    // The stream index is mixed before it meets the seed so that adjacent
    // (seed, stream) pairs land far apart in splitmix space.
    SplitMix64 sm(splitmix64_mix(spec.seed) ^ splitmix64_mix(spec.stream + 0x632be59bd9b4e019ULL));
    for (auto& w : s_) w = sm();
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() {
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

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::array<std::uint64_t, 4> s_;
};

using Rng = Xoshiro256ss;

// Uniform on [0, 1) with 53 random bits.
template <class G>
double uniform01(G& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Uniform on (0, 1]; safe to take the log of.
template <class G>
double uniform01_open_below(G& g) {
  return static_cast<double>((g() >> 11) + 1) * 0x1.0p-53;
}

// Uniform on (0, 1), midpoints of the 2^52 grid (exact in a double).
template <class G>
double uniform01_open(G& g) {
  return (static_cast<double>(g() >> 12) + 0.5) * 0x1.0p-52;
}

}  // namespace zmgx
