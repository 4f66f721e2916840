#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace ispi {

/// Parameters of the deterministic random binary pattern stream.
struct PatternSpec {
    std::uint32_t width = 32;
    std::uint32_t height = 32;
    double fill_probability = 0.5;
    std::uint64_t seed = 0;

    std::size_t pixel_count() const noexcept {
        return static_cast<std::size_t>(width) * height;
    }

    /// Throws std::invalid_argument on zero dimensions or a fill
    /// probability outside [0, 1].
    void validate() const;
};

/// One binary illumination frame. Pixels are row-major: x = row * width + col,
/// the indexing convention used project-wide.
struct Pattern {
    std::uint64_t index = 0; // 1-based measurement ordinal
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::vector<std::uint8_t> bits; // each element 0 or 1
};

/// Element-wise difference of two patterns; values in {-1, 0, +1}.
struct DiffPattern {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::vector<std::int8_t> values;
};

/// Generates the ordinal-th pattern (ordinal >= 1) as i.i.d. Bernoulli bits.
/// Pure function of (spec.seed, ordinal): the same inputs yield the same
/// bits on every platform, with no sequential generator state, so patterns
/// can be regenerated individually and in parallel.
Pattern gen_pattern(const PatternSpec& spec, std::uint64_t ordinal);

/// Allocation-free variant; bits.size() must equal spec.pixel_count().
void gen_pattern_into(const PatternSpec& spec, std::uint64_t ordinal,
                      std::span<std::uint8_t> bits);

/// b - a element-wise. Throws DimensionMismatch unless shapes agree.
DiffPattern pattern_diff(const Pattern& a, const Pattern& b);

} // namespace ispi
