#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace opo {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Pure
/// function of (counter, key); no state, so any (trajectory, step, channel)
/// triple can be drawn independently and in any order.
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr Counter generate(Counter ctr, Key key) {
        for (int r = 0; r < 10; ++r) {
            if (r > 0) {
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

/// Stream kinds keep initial-condition draws disjoint from per-step noise.
enum class StreamKind : std::uint32_t { StepNoise = 0, Initial = 1, Test = 2 };

/// Gaussian source addressed by (seed, trajectory, step, block). Each block
/// yields two independent standard normals via Box-Muller on two 53-bit
/// uniforms.
class GaussianStream {
public:
    GaussianStream(std::uint64_t seed, std::uint64_t trajectory)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          traj_lo_(static_cast<std::uint32_t>(trajectory)),
          traj_hi_(static_cast<std::uint32_t>(trajectory >> 32)) {}

    /// Two standard normals for (kind, index, block).
    std::array<double, 2> normal_pair(StreamKind kind, std::uint64_t index,
                                      std::uint32_t block) const {
        const Philox4x32::Counter ctr{static_cast<std::uint32_t>(index),
                                      static_cast<std::uint32_t>(index >> 32) ^
                                          (static_cast<std::uint32_t>(kind) << 24) ^
                                          (block << 16),
                                      traj_lo_, traj_hi_};
        const auto r = Philox4x32::generate(ctr, key_);
        const std::uint64_t w0 = (std::uint64_t{r[0]} << 32) | r[1];
        const std::uint64_t w1 = (std::uint64_t{r[2]} << 32) | r[3];
        // u1 in (0, 1], u2 in [0, 1)
        const double u1 = (static_cast<double>(w0 >> 11) + 1.0) * 0x1.0p-53;
        const double u2 = static_cast<double>(w1 >> 11) * 0x1.0p-53;
        const double rad = std::sqrt(-2.0 * std::log(u1));
        const double th = 2.0 * std::numbers::pi * u2;
        return {rad * std::cos(th), rad * std::sin(th)};
    }

    /// Raw 128-bit block, exposed for statistical tests of the generator.
    Philox4x32::Counter raw(std::uint64_t index, std::uint32_t block) const {
        return Philox4x32::generate(
            {static_cast<std::uint32_t>(index),
             static_cast<std::uint32_t>(index >> 32) ^
                 (static_cast<std::uint32_t>(StreamKind::Test) << 24) ^ (block << 16),
             traj_lo_, traj_hi_},
            key_);
    }

private:
    Philox4x32::Key key_;
    std::uint32_t traj_lo_;
    std::uint32_t traj_hi_;
};

}  // namespace opo
