#pragma once

#include <array>
#include <cmath>
#include <cstdint>

// ============================================================================
// Counter-based random numbers (Philox4x32-10, Salmon et al. 2011).
// A Stream is a pure function of (seed, three stream ids): replications,
// columns and noise vectors each get their own stream, so results never
// depend on execution order or thread count.
// ============================================================================

namespace sparsedetect::rng {

namespace detail {

inline constexpr std::uint32_t philox_m0 = 0xD2511F53u;
inline constexpr std::uint32_t philox_m1 = 0xCD9E8D57u;
inline constexpr std::uint32_t philox_w0 = 0x9E3779B9u;
inline constexpr std::uint32_t philox_w1 = 0xBB67AE85u;

inline void philox_round(std::array<std::uint32_t, 4>& c, std::uint32_t k0,
                         std::uint32_t k1) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(philox_m0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(philox_m1) * c[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
}

}  // namespace detail

/// One 10-round Philox4x32 block: 128 bits of counter -> 128 bits of output.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                               std::uint32_t key0,
                                               std::uint32_t key1) {
    for (int round = 0; round < 10; ++round) {
        detail::philox_round(counter, key0, key1);
        key0 += detail::philox_w0;
        key1 += detail::philox_w1;
    }
    return counter;
}

/// Sequential view of one Philox stream. The stream identity is
/// (seed, id0, id1, id2); the block index occupies the fourth counter word,
/// which caps a single stream at 2^32 blocks (ample for any replication).
class Stream {
public:
    Stream(std::uint64_t seed, std::uint32_t id0, std::uint32_t id1,
           std::uint32_t id2)
        : key0_(static_cast<std::uint32_t>(seed)),
          key1_(static_cast<std::uint32_t>(seed >> 32)),
          ctr_{id0, id1, id2, 0} {}

    std::uint32_t next_u32() {
        if (pos_ == 4) refill();
        return buf_[pos_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t hi = next_u32();
        return (hi << 32) | next_u32();
    }

    /// Uniform double in [0,1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; one spare value is cached.
    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - next_double();  // (0,1]; keeps log finite
        const double u2 = next_double();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 6.283185307179586476925286766559 * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

    /// +1 or -1 with equal probability.
    double next_rademacher() { return (next_u32() & 1u) ? 1.0 : -1.0; }

    /// Uniform on [-sqrt(3), sqrt(3)] (unit variance).
    double next_uniform_unitvar() {
        return 1.7320508075688772935274463415059 * (2.0 * next_double() - 1.0);
    }

    /// Unbiased uniform integer in [0, bound) by rejection.
    std::uint64_t next_below(std::uint64_t bound) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % bound;
    }

private:
    void refill() {
        buf_ = philox4x32(ctr_, key0_, key1_);
        ++ctr_[3];
        pos_ = 0;
    }

    std::uint32_t key0_, key1_;
    std::array<std::uint32_t, 4> ctr_;
    std::array<std::uint32_t, 4> buf_{};
    int pos_ = 4;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace sparsedetect::rng
