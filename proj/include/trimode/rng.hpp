#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace trimode {

/// Philox4x64-10 counter-based generator (Salmon et al., Random123).
/// Stateless: the output block is a pure function of (counter, key).
class Philox4x64 {
 public:
  using Block = std::array<std::uint64_t, 4>;
  using Key = std::array<std::uint64_t, 2>;

  static Block generate(Block counter, Key key) {
    for (int round = 0; round < 10; ++round) {
      const auto [hi0, lo0] = mulhilo(kMul0, counter[0]);
      const auto [hi1, lo1] = mulhilo(kMul1, counter[2]);
      counter = {hi1 ^ counter[1] ^ key[0], lo1, hi0 ^ counter[3] ^ key[1],
                 lo0};
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return counter;
  }

 private:
  static constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
  static constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
  static constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
  static constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

  struct HiLo {
    std::uint64_t hi, lo;
  };
  static HiLo mulhilo(std::uint64_t a, std::uint64_t b) {
    const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
    return {static_cast<std::uint64_t>(p >> 64), static_cast<std::uint64_t>(p)};
  }
};

/// Standard normal stream keyed by (seed, trial, channel). Each call to
/// next_block() consumes one counter value and yields four normals.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint32_t trial, std::uint32_t channel)
      : key_{seed, (static_cast<std::uint64_t>(trial) << 32) | channel} {}

  std::array<double, 4> next_block() {
    const auto bits = Philox4x64::generate({counter_++, 0, 0, 0}, key_);
    std::array<double, 4> out;
    for (int pair = 0; pair < 2; ++pair) {
      // u1 in (0, 1], u2 in [0, 1).
      const double u1 = (static_cast<double>(bits[2 * pair] >> 11) + 1.0) * 0x1.0p-53;
      const double u2 = static_cast<double>(bits[2 * pair + 1] >> 11) * 0x1.0p-53;
      const double r = std::sqrt(-2.0 * std::log(u1));
      const double angle = 6.283185307179586476925 * u2;
      out[2 * pair] = r * std::cos(angle);
      out[2 * pair + 1] = r * std::sin(angle);
    }
    return out;
  }

  void seek(std::uint64_t counter) { counter_ = counter; }
  std::uint64_t position() const { return counter_; }

 private:
  Philox4x64::Key key_;
  std::uint64_t counter_ = 0;
};

}  // namespace trimode
