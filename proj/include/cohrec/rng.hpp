#pragma once

#include <cmath>
#include <cstdint>

#include "cohrec/constants.hpp"

namespace cohrec::rng {

inline constexpr std::uint64_t golden_gamma = 0x9E3779B97F4A7C15ull;

/// SplitMix64 output scrambler (Steele, Lea & Flood / Vigna).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

/// Labels for independent random streams derived from one run seed.
enum class StreamTag : std::uint64_t {
    generic = 0,
    photon = 1,      // one stream per photon index
    total_count = 2, // Poisson draw of the total photon number
    scan_row = 3,    // per-row seed derivation in parameter scans
};

/// Splittable counter-based generator (SplitMix64).
///
/// Stream derivation contract: the stream for (seed, tag, index) starts at
///
///     state0 = mix64( mix64(seed ^ mix64(tag)) ^ mix64(index + golden_gamma) )
///
/// and then advances by the standard SplitMix64 increment. Every consumer
/// draws only from its own (tag, index) stream, so results are reproducible
/// bit-for-bit regardless of evaluation order or sharding.
class SplitMix64 {
public:
    explicit constexpr SplitMix64(std::uint64_t state) noexcept : state_(state) {}

    static constexpr SplitMix64 stream(std::uint64_t seed, StreamTag tag,
                                       std::uint64_t index) noexcept {
        const std::uint64_t s = mix64(seed ^ mix64(static_cast<std::uint64_t>(tag)));
        return SplitMix64(mix64(s ^ mix64(index + golden_gamma)));
    }

    constexpr std::uint64_t next() noexcept {
        state_ += golden_gamma;
        return mix64(state_);
    }

    /// Uniform double in [0, 1), 53 random bits.
    double next_double() noexcept {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in (0, 1]; safe as a log() argument.
    double next_open() noexcept {
        return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
    }

    /// Standard normal deviate via Box-Muller. Consumes two uniforms per
    /// call; the companion deviate is discarded to keep the draw count per
    /// call fixed.
    double next_normal() noexcept {
        const double u1 = next_open();
        const double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }

private:
    std::uint64_t state_;
};

/// Exact Poisson sampler. Splits the mean into chunks of at most 500 and
/// sums independent Knuth draws; a sum of Poisson variates is Poisson, and
/// the chunk bound keeps exp(-chunk) far above double underflow.
inline std::uint64_t sample_poisson(SplitMix64& gen, double mean) {
    std::uint64_t total = 0;
    double remaining = mean;
    while (remaining > 0.0) {
        const double lambda = remaining < 500.0 ? remaining : 500.0;
        remaining -= lambda;
        const double limit = std::exp(-lambda);
        double product = 1.0;
        std::uint64_t k = 0;
        do {
            ++k;
            product *= gen.next_open();
        } while (product > limit);
        total += k - 1;
    }
    return total;
}

} // namespace cohrec::rng
