#ifndef DIRACSOC_PHILOX_HPP
#define DIRACSOC_PHILOX_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace diracsoc {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). The output is
// a pure function of (key, counter), so any path and step can be drawn
// independently of scheduling.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kW0;
        key[1] += kW1;
      }
      const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

  static Key key_from_seed(std::uint64_t seed) {
    return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  }

  // Two standard normals for (stream, step, slot) by Box-Muller on two
  // 64-bit uniforms in (0, 1].
  static std::pair<double, double> normal_pair(Key key, std::uint64_t stream, std::uint32_t step, std::uint32_t slot) {
    const Counter out = generate({static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), step, slot}, key);
    const std::uint64_t a = (std::uint64_t{out[0]} << 32) | out[1];
    const std::uint64_t b = (std::uint64_t{out[2]} << 32) | out[3];
    const double u1 = (static_cast<double>(a >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(theta), r * std::sin(theta)};
  }

 private:
  static constexpr std::uint32_t kM0 = 0xD2511F53u;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kW0 = 0x9E3779B9u;
  static constexpr std::uint32_t kW1 = 0xBB67AE85u;
};

}  // namespace diracsoc

#endif  // DIRACSOC_PHILOX_HPP
