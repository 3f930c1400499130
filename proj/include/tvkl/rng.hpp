#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace tvkl {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123 family).
/// Chosen over std::mt19937 because the output is a pure function of
/// (key, counter): independent streams are cheap and runs replay exactly,
/// regardless of how work is split across threads.
class Philox4x32 {
public:
    /// One stream per (seed, stream) pair. The seed becomes the cipher key,
    /// the stream id occupies the high counter words.
    explicit Philox4x32(std::uint64_t seed, std::uint64_t stream = 0) noexcept {
        key_ = {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
        counter_ = {0u, 0u, static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
    }

    std::uint32_t next_u32() noexcept {
        if (buf_pos_ == 4) {
            buf_ = block(counter_, key_);
            advance_counter();
            buf_pos_ = 0;
        }
        return buf_[buf_pos_++];
    }

    std::uint64_t next_u64() noexcept {
        std::uint64_t lo = next_u32();
        std::uint64_t hi = next_u32();
        return (hi << 32) | lo;
    }

    /// Uniform double strictly inside (0, 1): 53 random bits offset by half an ulp.
    double uniform() noexcept {
        return (double(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Uniform in (lo, hi).
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Raw 10-round block function, exposed for known-answer tests.
    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                              std::array<std::uint32_t, 2> key) noexcept {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += 0x9E3779B9u;
                key[1] += 0xBB67AE85u;
            }
            const std::uint64_t p0 = std::uint64_t(0xD2511F53u) * ctr[0];
            const std::uint64_t p1 = std::uint64_t(0xCD9E8D57u) * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
                   static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
                   static_cast<std::uint32_t>(p0)};
        }
        return ctr;
    }

private:
    void advance_counter() noexcept {
        if (++counter_[0] == 0) ++counter_[1];
    }

    std::array<std::uint32_t, 4> counter_{};
    std::array<std::uint32_t, 2> key_{};
    std::array<std::uint32_t, 4> buf_{};
    int buf_pos_ = 4;
};

/// ln(k!) with an exact table for small k and a Stirling tail otherwise.
inline double log_factorial(std::uint64_t k) noexcept {
    static constexpr int kTableSize = 256;
    static const auto table = [] {
        std::array<double, kTableSize> t{};
        double acc = 0.0;
        t[0] = 0.0;
        for (int i = 1; i < kTableSize; ++i) {
            acc += std::log(double(i));
            t[i] = acc;
        }
        return t;
    }();
    if (k < kTableSize) return table[k];
    const double x = double(k);
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    // Stirling series; next omitted term is ~1/(1188 x^9), far below 1e-16 here.
    return (x + 0.5) * std::log(x) - x + 0.9189385332046727 // 0.5*ln(2*pi)
           + inv * (1.0 / 12.0 + inv2 * (-1.0 / 360.0 + inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
}

namespace detail {

inline long poisson_inversion(Philox4x32& rng, double lambda) noexcept {
    // Sequential search over the CDF; exact for the low means where it is used.
    const double u = rng.uniform();
    double p = std::exp(-lambda);
    double cdf = p;
    long k = 0;
    while (u > cdf && k < 1100) {
        ++k;
        p *= lambda / double(k);
        cdf += p;
    }
    return k;
}

inline long poisson_transformed_rejection(Philox4x32& rng, double lambda) noexcept {
    // Hoermann's PTRD algorithm: a transformed-rejection sampler whose
    // acceptance rate stays high for all large means.
    const double smu = std::sqrt(lambda);
    const double b = 0.931 + 2.53 * smu;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    const double log_lambda = std::log(lambda);

    for (;;) {
        double v = rng.uniform();
        if (v <= 0.86 * v_r) {
            // Common fast path: accept without evaluating the density.
            const double u = v / v_r - 0.43;
            return long((2.0 * a / (0.5 - std::fabs(u)) + b) * u + lambda + 0.445);
        }

        double u;
        if (v >= v_r) {
            u = rng.uniform() - 0.5;
        } else {
            u = v / v_r - 0.93;
            u = (u < 0.0 ? -0.5 : 0.5) - u;
            v = rng.uniform() * v_r;
        }

        const double us = 0.5 - std::fabs(u);
        if (us < 0.013 && v > us) continue;

        const double k = std::floor((2.0 * a / us + b) * u + lambda + 0.445);
        v = v * inv_alpha / (a / (us * us) + b);
        if (k >= 10.0) {
            if (std::log(v * smu) <=
                (k + 0.5) * std::log(lambda / k) - lambda - 0.9189385332046727 + k -
                    (1.0 / 12.0 - 1.0 / (360.0 * k * k)) / k)
                return long(k);
        } else if (k >= 0.0) {
            if (std::log(v) <= k * log_lambda - lambda - log_factorial(std::uint64_t(k)))
                return long(k);
        }
    }
}

} // namespace detail

/// One Poisson(lambda) draw. Inversion below mean 30, transformed rejection above;
/// the split keeps low-count draws exact and high-count draws O(1).
inline long poisson_draw(Philox4x32& rng, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("poisson_draw: lambda must be positive");
    if (lambda < 30.0) return detail::poisson_inversion(rng, lambda);
    return detail::poisson_transformed_rejection(rng, lambda);
}

/// Stream-id packing used across the project so that every consumer of
/// randomness gets a disjoint Philox stream for a given user seed.
enum class StreamTag : std::uint64_t {
    observation = 1,
    mc_discrepancy = 2,
    power_iteration = 3,
    phantom = 4,
    test = 15,
};

inline std::uint64_t make_stream(StreamTag tag, std::uint64_t index = 0,
                                 std::uint64_t sub = 0) noexcept {
    return (static_cast<std::uint64_t>(tag) << 56) | ((index & 0xFFFFFFu) << 32) |
           (sub & 0xFFFFFFFFu);
}

} // namespace tvkl
