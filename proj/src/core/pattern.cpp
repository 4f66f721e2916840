#include "core/pattern.hpp"

#include <cmath>
#include <stdexcept>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace ispi {

void PatternSpec::validate() const {
    if (width < 1 || height < 1) {
        throw std::invalid_argument("pattern dimensions must be at least 1x1");
    }
    if (!(fill_probability >= 0.0 && fill_probability <= 1.0)) {
        throw std::invalid_argument("fill_probability must lie in [0, 1]");
    }
}

void gen_pattern_into(const PatternSpec& spec, std::uint64_t ordinal,
                      std::span<std::uint8_t> bits) {
    spec.validate();
    if (ordinal < 1) {
        throw std::invalid_argument("pattern ordinal must be >= 1");
    }
    if (bits.size() != spec.pixel_count()) {
        throw DimensionMismatch("pattern buffer size does not match spec dimensions");
    }
    const std::uint64_t key = rng::derive_key(spec.seed, ordinal);
    const double p = spec.fill_probability;
    for (std::size_t x = 0; x < bits.size(); ++x) {
        bits[x] = rng::uniform(key, x) < p ? 1 : 0;
    }
}

Pattern gen_pattern(const PatternSpec& spec, std::uint64_t ordinal) {
    Pattern out;
    out.index = ordinal;
    out.width = spec.width;
    out.height = spec.height;
    out.bits.resize(spec.pixel_count());
    gen_pattern_into(spec, ordinal, out.bits);
    return out;
}

DiffPattern pattern_diff(const Pattern& a, const Pattern& b) {
    if (a.width != b.width || a.height != b.height || a.bits.size() != b.bits.size()) {
        throw DimensionMismatch("pattern_diff requires identical dimensions");
    }
    DiffPattern out;
    out.width = a.width;
    out.height = a.height;
    out.values.resize(a.bits.size());
    for (std::size_t x = 0; x < a.bits.size(); ++x) {
        out.values[x] = static_cast<std::int8_t>(static_cast<int>(b.bits[x]) -
                                                 static_cast<int>(a.bits[x]));
    }
    return out;
}

} // namespace ispi
