#pragma once

#include <cmath>
#include <cstdint>
#include <utility>

namespace lqmfg {

/// Philox4x32-10 counter-based generator. Output depends only on (seed,
/// counter), so draws keyed by (member, player, step, component) are
/// identical under any execution order or thread partitioning.
class CounterRng {
  public:
    explicit CounterRng(std::uint64_t seed) : k0_((std::uint32_t)seed), k1_((std::uint32_t)(seed >> 32)) {}

    /// Four 32-bit words for one 128-bit counter.
    struct Block {
        std::uint32_t x[4];
    };

    Block block(std::uint32_t w0, std::uint32_t w1, std::uint32_t w2, std::uint32_t w3) const
    {
        std::uint32_t c0 = w0, c1 = w1, c2 = w2, c3 = w3;
        std::uint32_t k0 = k0_, k1 = k1_;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = (std::uint64_t)0xD2511F53u * c0;
            const std::uint64_t p1 = (std::uint64_t)0xCD9E8D57u * c2;
            const std::uint32_t hi0 = (std::uint32_t)(p0 >> 32), lo0 = (std::uint32_t)p0;
            const std::uint32_t hi1 = (std::uint32_t)(p1 >> 32), lo1 = (std::uint32_t)p1;
            c0 = hi1 ^ c1 ^ k0;
            c1 = lo1;
            c2 = hi0 ^ c3 ^ k1;
            c3 = lo0;
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        return Block{{c0, c1, c2, c3}};
    }

    /// Uniform draw in (0, 1).
    double uniform(std::uint32_t w0, std::uint32_t w1, std::uint32_t w2, std::uint32_t w3) const
    {
        Block b = block(w0, w1, w2, w3);
        return to_unit(((std::uint64_t)b.x[0] << 32) | b.x[1]);
    }

    /// Two independent standard normals from one counter (Box-Muller).
    std::pair<double, double> normal_pair(std::uint32_t w0, std::uint32_t w1, std::uint32_t w2,
                                          std::uint32_t w3) const
    {
        Block b = block(w0, w1, w2, w3);
        const double u1 = to_unit(((std::uint64_t)b.x[0] << 32) | b.x[1]);
        const double u2 = to_unit(((std::uint64_t)b.x[2] << 32) | b.x[3]);
        const double r = std::sqrt(-2.0 * std::log(u1));
        return {r * std::cos(2.0 * M_PI * u2), r * std::sin(2.0 * M_PI * u2)};
    }

    double normal(std::uint32_t w0, std::uint32_t w1, std::uint32_t w2, std::uint32_t w3) const
    {
        return normal_pair(w0, w1, w2, w3).first;
    }

  private:
    static double to_unit(std::uint64_t x)
    {
        // 53-bit mantissa, bounded away from zero
        return ((x >> 11) + 0.5) * 0x1.0p-53;
    }

    std::uint32_t k0_, k1_;
};

}  // namespace lqmfg
