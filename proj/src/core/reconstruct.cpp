#include "core/reconstruct.hpp"

#include <cstring>
#include <limits>
#include <stdexcept>

#include "core/errors.hpp"

namespace ispi {

AccumulatorMode AccumulatorMode::fixed(unsigned bits) {
    if (bits < 2 || bits > 63) {
        throw std::invalid_argument("fixed-point width must lie in [2, 63]");
    }
    return AccumulatorMode(bits);
}

IgiReconstructor::IgiReconstructor(std::uint32_t width, std::uint32_t height,
                                   AccumulatorMode mode)
    : width_(width), height_(height), mode_(mode) {
    if (width < 1 || height < 1) {
        throw std::invalid_argument("reconstructor dimensions must be at least 1x1");
    }
    if (mode_.is_exact()) {
        sat_min_ = std::numeric_limits<std::int64_t>::min();
        sat_max_ = std::numeric_limits<std::int64_t>::max();
    } else {
        sat_max_ = (std::int64_t{1} << (mode_.bits() - 1)) - 1;
        sat_min_ = -(std::int64_t{1} << (mode_.bits() - 1));
    }
    const std::size_t n = static_cast<std::size_t>(width) * height;
    prev_bits_.assign(n, 0);
    acc_.assign(n, 0);
}

template <bool Saturating>
void IgiReconstructor::accumulate(std::int64_t ds,
                                  std::span<const std::uint8_t> bits) {
    const std::size_t n = acc_.size();
    for (std::size_t x = 0; x < n; ++x) {
        const std::int64_t di =
            static_cast<std::int64_t>(bits[x]) - static_cast<std::int64_t>(prev_bits_[x]);
        if (di == 0) {
            continue;
        }
        if constexpr (Saturating) {
            // |acc| <= 2^62 and |ds| <= 2^17, so the raw sum cannot wrap.
            std::int64_t v = acc_[x] + ds * di;
            if (v > sat_max_) {
                v = sat_max_;
                saturated_ = true;
            } else if (v < sat_min_) {
                v = sat_min_;
                saturated_ = true;
            }
            acc_[x] = v;
        } else {
            acc_[x] += ds * di;
        }
    }
}

void IgiReconstructor::step(std::int64_t sample,
                            std::span<const std::uint8_t> pattern_bits) {
    if (pattern_bits.size() != acc_.size()) {
        throw DimensionMismatch("pattern does not match reconstructor dimensions");
    }
    if (has_prev_) {
        const std::int64_t ds = sample - prev_sample_;
        if (ds != 0) {
            if (mode_.is_exact()) {
                accumulate<false>(ds, pattern_bits);
            } else {
                accumulate<true>(ds, pattern_bits);
            }
        }
        ++pairs_;
    }
    std::memcpy(prev_bits_.data(), pattern_bits.data(), pattern_bits.size());
    prev_sample_ = sample;
    has_prev_ = true;
    ++consumed_;
}

ReconImage IgiReconstructor::finalize() const {
    if (pairs_ == 0) {
        throw StateError("no difference pairs accumulated yet");
    }
    ReconImage img;
    img.width = width_;
    img.height = height_;
    img.values.resize(acc_.size());
    const double scale = 1.0 / (2.0 * static_cast<double>(pairs_));
    for (std::size_t x = 0; x < acc_.size(); ++x) {
        img.values[x] = static_cast<double>(acc_[x]) * scale;
    }
    return img;
}

void IgiReconstructor::begin_frame() noexcept {
    std::memset(acc_.data(), 0, acc_.size() * sizeof(std::int64_t));
    pairs_ = 0;
    saturated_ = false;
}

std::size_t IgiReconstructor::memory_bytes() const noexcept {
    return sizeof(*this) + prev_bits_.capacity() * sizeof(std::uint8_t) +
           acc_.capacity() * sizeof(std::int64_t);
}

ReconImage cgi_reconstruct(std::uint32_t width, std::uint32_t height,
                           std::span<const std::int64_t> samples,
                           std::span<const std::uint8_t> packed_patterns) {
    if (width < 1 || height < 1) {
        throw std::invalid_argument("image dimensions must be at least 1x1");
    }
    const std::size_t pixels = static_cast<std::size_t>(width) * height;
    const std::size_t n = samples.size();
    if (n < 2) {
        throw std::invalid_argument("need at least 2 measurements");
    }
    if (packed_patterns.size() != n * pixels) {
        throw DimensionMismatch("pattern buffer does not match measurement count");
    }

    // <S I(x)> - <S><I(x)>, all sums exact in integers.
    std::vector<std::int64_t> cross(pixels, 0);
    std::vector<std::int64_t> bit_sum(pixels, 0);
    std::int64_t sample_sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::int64_t s = samples[i];
        sample_sum += s;
        const std::uint8_t* row = packed_patterns.data() + i * pixels;
        for (std::size_t x = 0; x < pixels; ++x) {
            if (row[x]) {
                cross[x] += s;
                ++bit_sum[x];
            }
        }
    }

    ReconImage img;
    img.width = width;
    img.height = height;
    img.values.resize(pixels);
    const double inv_n = 1.0 / static_cast<double>(n);
    const double mean_s = static_cast<double>(sample_sum) * inv_n;
    for (std::size_t x = 0; x < pixels; ++x) {
        img.values[x] = static_cast<double>(cross[x]) * inv_n -
                        mean_s * (static_cast<double>(bit_sum[x]) * inv_n);
    }
    return img;
}

ReconImage cgi_reconstruct(std::span<const std::int64_t> samples,
                           std::span<const Pattern> patterns) {
    if (samples.size() != patterns.size()) {
        throw DimensionMismatch("sample and pattern counts must match");
    }
    if (patterns.empty()) {
        throw std::invalid_argument("need at least 2 measurements");
    }
    const std::uint32_t w = patterns.front().width;
    const std::uint32_t h = patterns.front().height;
    const std::size_t pixels = static_cast<std::size_t>(w) * h;
    std::vector<std::uint8_t> packed;
    packed.reserve(patterns.size() * pixels);
    for (const Pattern& p : patterns) {
        if (p.width != w || p.height != h || p.bits.size() != pixels) {
            throw DimensionMismatch("patterns must share one shape");
        }
        packed.insert(packed.end(), p.bits.begin(), p.bits.end());
    }
    return cgi_reconstruct(w, h, samples, packed);
}

FrameStreamer::FrameStreamer(std::uint32_t width, std::uint32_t height,
                             AccumulatorMode mode, std::uint64_t measurements_per_frame)
    : igi_(width, height, mode), n_(measurements_per_frame) {
    if (measurements_per_frame < 2) {
        throw std::invalid_argument("measurements per frame must be >= 2");
    }
}

std::optional<ReconImage> FrameStreamer::feed(std::int64_t sample,
                                              std::span<const std::uint8_t> pattern_bits) {
    igi_.step(sample, pattern_bits);
    if (++in_frame_ < n_) {
        return std::nullopt;
    }
    ReconImage img = igi_.finalize();
    igi_.begin_frame();
    in_frame_ = 0;
    ++frames_;
    return img;
}

} // namespace ispi
