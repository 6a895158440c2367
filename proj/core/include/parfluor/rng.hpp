#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <utility>

namespace parfluor {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Stateless:
/// the output is a pure function of (counter, key).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += 0x9E3779B9u;
        key[1] += 0xBB67AE85u;
      }
      const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }
};

/// Stream of standard normal pairs addressed by (seed, stream, index):
/// one Philox block per index, Box-Muller on two 53-bit uniforms.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  std::pair<double, double> pair(std::uint64_t index) const {
    const auto r = Philox4x32::generate(
        {static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
         static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
        {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
    // (0, 1] and [0, 1)
    const double u1 = (static_cast<double>(join53(r[0], r[1])) + 1.0) * 0x1p-53;
    const double u2 = static_cast<double>(join53(r[2], r[3])) * 0x1p-53;
    const double rad = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * 3.14159265358979323846 * u2;
    return {rad * std::cos(phi), rad * std::sin(phi)};
  }

 private:
  static std::uint64_t join53(std::uint32_t a, std::uint32_t b) {
    return ((std::uint64_t{a} << 32) | b) >> 11;
  }
  std::uint64_t seed_;
  std::uint64_t stream_;
};

}  // namespace parfluor
