#pragma once

#include <array>
#include <cstdint>

namespace lmaxlab {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
///
/// Stateless: every output block is a pure function of (key, counter), which
/// is what makes replicate streams independent of scheduling.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit constexpr Philox4x32(Key key) : key_(key) {}
  explicit constexpr Philox4x32(std::uint64_t seed)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  constexpr Counter operator()(Counter ctr) const {
    Key k = key_;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ k[0], lo1, hi0 ^ ctr[3] ^ k[1], lo0};
      k[0] += kW0;
      k[1] += kW1;
    }
    return ctr;
  }

  /// Two 64-bit words for the cell (i, j) of replicate `stream`.
  constexpr std::array<std::uint64_t, 2> cell(std::uint32_t i, std::uint32_t j,
                                              std::uint64_t stream) const {
    const Counter out = (*this)({i, j, static_cast<std::uint32_t>(stream),
                                 static_cast<std::uint32_t>(stream >> 32)});
    return {(std::uint64_t{out[1]} << 32) | out[0], (std::uint64_t{out[3]} << 32) | out[2]};
  }

 private:
  static constexpr std::uint32_t kM0 = 0xD2511F53u;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kW0 = 0x9E3779B9u;
  static constexpr std::uint32_t kW1 = 0xBB67AE85u;

  Key key_;
};

/// Uniform on the open interval (0, 1) from the top 53 bits.
constexpr double open_unit(std::uint64_t bits) {
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

}  // namespace lmaxlab
