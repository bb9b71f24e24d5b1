#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace cvqss {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11). A block of
/// four 32-bit words is a pure function of (key, counter), so any draw in the
/// simulation is addressable by (seed, pulse, player, purpose) and results do
/// not depend on thread partitioning.
struct Philox4x32 {
  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                            std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
    constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
             static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
             static_cast<std::uint32_t>(p0)};
      key[0] += kW0;
      key[1] += kW1;
    }
    return ctr;
  }
};

/// Substream purposes; part of the documented (seed, pulse, player, purpose)
/// mixing contract. Values are stable: they define the batch contents.
enum class Stream : std::uint32_t {
  kSymbol = 0,    ///< player symbol pair (x_k, p_k)
  kExcess = 1,    ///< player station excess noise (e_x, e_p)
  kPhase = 2,     ///< residual phase-rotation angle theta_k
  kDetector = 3,  ///< dealer outcome noise (v_x, v_p); player = 0
  kSelect = 4,    ///< disclosure/round assignment uniforms; player = 0
};

/// One addressed Philox block mapped to two uniforms or two normals.
class SubstreamDraw {
 public:
  SubstreamDraw(std::uint64_t seed, std::uint64_t pulse, std::uint32_t player,
                Stream purpose) {
    const auto words = Philox4x32::block(
        {static_cast<std::uint32_t>(pulse), static_cast<std::uint32_t>(pulse >> 32),
         player, static_cast<std::uint32_t>(purpose)},
        {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
    u0_ = (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
    u1_ = (static_cast<std::uint64_t>(words[2]) << 32) | words[3];
  }

  /// Uniforms in the open interval (0, 1).
  double uniform0() const { return to_unit(u0_); }
  double uniform1() const { return to_unit(u1_); }

  /// Box-Muller pair, standard normal.
  std::array<double, 2> normals() const {
    const double r = std::sqrt(-2.0 * std::log(uniform0()));
    const double phi = 2.0 * M_PI * uniform1();
    return {r * std::cos(phi), r * std::sin(phi)};
  }

 private:
  static double to_unit(std::uint64_t u) {
    return (static_cast<double>(u >> 11) + 0.5) * 0x1.0p-53;
  }
  std::uint64_t u0_ = 0;
  std::uint64_t u1_ = 0;
};

}  // namespace cvqss
