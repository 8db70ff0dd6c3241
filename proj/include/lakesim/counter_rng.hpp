#pragma once

// Philox4x32-10 counter-based generator (Salmon et al., SC'11 constants).
// A draw is a pure function of (key, counter), so tables can be generated in
// any order and replayed bit for bit.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace lakesim {

using PhiloxBlock = std::array<std::uint32_t, 4>;

constexpr PhiloxBlock philox4x32_10(PhiloxBlock counter, std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u;
  constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u;
  constexpr std::uint32_t kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * counter[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * counter[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    counter = {hi1 ^ counter[1] ^ key[0], lo1, hi0 ^ counter[3] ^ key[1], lo0};
    key[0] += kW0;
    key[1] += kW1;
  }
  return counter;
}

/// Standard normal draw addressed by (seed, index, stream, lane) via
/// Box-Muller on two 53-bit uniforms taken from one Philox block.
inline double counter_normal(std::uint64_t seed, std::uint64_t index, std::uint32_t stream,
                             std::uint32_t lane = 0) {
  const PhiloxBlock ctr{static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                        stream, lane};
  const auto r = philox4x32_10(ctr, {static_cast<std::uint32_t>(seed),
                                     static_cast<std::uint32_t>(seed >> 32)});
  const std::uint64_t a = ((static_cast<std::uint64_t>(r[0]) << 32) | r[1]) >> 11;
  const std::uint64_t b = ((static_cast<std::uint64_t>(r[2]) << 32) | r[3]) >> 11;
  constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
  const double u1 = (static_cast<double>(a) + 0.5) * kScale;
  const double u2 = (static_cast<double>(b) + 0.5) * kScale;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace lakesim
