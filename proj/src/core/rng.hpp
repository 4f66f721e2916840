#pragma once

#include <cmath>
#include <cstdint>

// Counter-based deterministic randomness. Every draw is a pure function of
// (key, index), so any part of a stream can be regenerated out of order and
// in parallel. Pure integer mixing keeps the bit streams identical across
// platforms.

namespace ispi::rng {

inline constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Stream key for the ordinal-th draw sequence under a user seed. Two mixing
/// rounds keep keys of nearby (seed, ordinal) pairs unrelated.
constexpr std::uint64_t derive_key(std::uint64_t seed, std::uint64_t ordinal) noexcept {
    return mix64(mix64(seed + kGamma * ordinal) + kGamma);
}

/// index-th raw draw of the stream identified by key.
constexpr std::uint64_t at(std::uint64_t key, std::uint64_t index) noexcept {
    return mix64(key + kGamma * (index + 1));
}

/// Maps a raw draw to [0, 1) with 53-bit resolution.
constexpr double unit(std::uint64_t bits) noexcept {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

inline double uniform(std::uint64_t key, std::uint64_t index) noexcept {
    return unit(at(key, index));
}

/// Standard normal via Box-Muller; consumes raw draws 2*index and 2*index+1.
inline double gaussian(std::uint64_t key, std::uint64_t index) noexcept {
    // first uniform shifted into (0, 1] so the log is finite
    const double u1 = static_cast<double>((at(key, 2 * index) >> 11) + 1) * 0x1.0p-53;
    const double u2 = unit(at(key, 2 * index + 1));
    constexpr double two_pi = 6.28318530717958647692528676655900577;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

/// Poisson draw with the given mean; consumes a variable number of raw draws
/// from the stream identified by key, so give each draw its own key.
std::uint64_t poisson(std::uint64_t key, double mean);

} // namespace ispi::rng
