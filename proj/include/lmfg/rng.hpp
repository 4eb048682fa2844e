#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace lmfg {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// A pure function of (counter, key): the draw for any (seed, step, agent,
/// purpose) tuple is reproducible regardless of evaluation order.
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr Counter generate(Counter ctr, Key key) {
        for (int r = 0; r < 10; ++r) {
            if (r > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// Purposes of the per-agent draws within one step.
enum class DrawPurpose : std::uint32_t { jump = 0, innovation = 1 };

/// Streams keyed by (seed, step, stream id, purpose).
struct CounterRng {
    std::uint64_t seed = 0;

    Philox4x32::Counter draw(std::uint64_t step, std::uint32_t stream, DrawPurpose purpose) const {
        return Philox4x32::generate(
            {stream, static_cast<std::uint32_t>(purpose), static_cast<std::uint32_t>(step),
             static_cast<std::uint32_t>(step >> 32)},
            {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
    }
};

inline std::uint64_t combine_words(std::uint32_t hi, std::uint32_t lo) {
    return (std::uint64_t{hi} << 32) | lo;
}

/// Uniform on the open interval (0,1) with 52 random bits; both ends stay
/// representable (53 bits plus a half-step would round up to 1).
inline double unit_open(std::uint32_t hi, std::uint32_t lo) {
    return (static_cast<double>(combine_words(hi, lo) >> 12) + 0.5) * 0x1.0p-52;
}

__extension__ typedef unsigned __int128 uint128;

/// Uniform integer in [0, bound) by the multiply-high method.
inline std::uint64_t bounded(std::uint32_t hi, std::uint32_t lo, std::uint64_t bound) {
    return static_cast<std::uint64_t>(
        (static_cast<uint128>(combine_words(hi, lo)) * bound) >> 64);
}

/// Standard normal via Box-Muller (cosine branch) from one 4-word block.
inline double standard_normal(const Philox4x32::Counter& w) {
    const double u1 = unit_open(w[0], w[1]);
    const double u2 = unit_open(w[2], w[3]);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace lmfg
