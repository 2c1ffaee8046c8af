#pragma once

#include <array>
#include <cstdint>

namespace sgdrates {

/// Philox4x32-10 block function (Salmon et al., SC'11): a keyed bijection of
/// a 128-bit counter. Same constants and round structure as Random123.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr const char* name = "philox4x32-10";

  static Counter block(Counter ctr, Key key) {
    std::uint32_t c0 = ctr[0], c1 = ctr[1], c2 = ctr[2], c3 = ctr[3];
    std::uint32_t k0 = key[0], k1 = key[1];
#pragma GCC unroll 10
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t{kMulA} * c0;
      const std::uint64_t p1 = std::uint64_t{kMulB} * c2;
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
      c0 = hi1 ^ c1 ^ k0;
      c1 = lo1;
      c2 = hi0 ^ c3 ^ k1;
      c3 = lo0;
      k0 += kWeylA;
      k1 += kWeylB;
    }
    return {c0, c1, c2, c3};
  }

 private:
  static constexpr std::uint32_t kMulA = 0xD2511F53;
  static constexpr std::uint32_t kMulB = 0xCD9E8D57;
  static constexpr std::uint32_t kWeylA = 0x9E3779B9;
  static constexpr std::uint32_t kWeylB = 0xBB67AE85;
};

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Seed of path i: splitmix64(base_seed ^ splitmix64(i)). Part of the output
/// contract; changing it changes every Monte-Carlo CSV.
constexpr std::uint64_t derive_path_seed(std::uint64_t base_seed, std::uint64_t path_index) {
  return splitmix64(base_seed ^ splitmix64(path_index));
}

/// Sequential stream over Philox blocks keyed by a 64-bit seed. Block j uses
/// counter (j_lo, j_hi, 0, 0); words are consumed in order 0..3.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  std::uint32_t next_u32() {
    if (pos_ == 4) refill();
    return buffer_[pos_++];
  }

  std::uint64_t next_u64() {
    const std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  /// Uniform on [0, 1) with 53 random bits.
  double next_uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1) from one 32-bit word, at the midpoints k + 1/2.
  double next_uniform32() { return (static_cast<double>(next_u32()) + 0.5) * 0x1.0p-32; }

  std::uint64_t blocks_used() const { return block_; }

 private:
  void refill() {
    buffer_ = Philox4x32::block({static_cast<std::uint32_t>(block_),
                                 static_cast<std::uint32_t>(block_ >> 32), 0, 0},
                                key_);
    ++block_;
    pos_ = 0;
  }

  Philox4x32::Key key_;
  Philox4x32::Counter buffer_{};
  std::uint64_t block_ = 0;
  int pos_ = 4;
};

}  // namespace sgdrates
