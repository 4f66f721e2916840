#include "core/forward.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace ispi {

namespace {

// Domain tags keep detector draws decorrelated from the pattern stream even
// when both use the same numeric seed.
constexpr std::uint64_t kDetectorDomain = 0xD3E7EC70A1B2C3D4ull;
constexpr std::uint64_t kReadStream = 0x9D2C5680A55AA55Aull;
constexpr std::uint64_t kShotStream = 0x6A09E667F3BCC909ull;

} // namespace

void TimingSpec::validate() const {
    if (!(dmd_rate_hz > 0.0)) {
        throw std::invalid_argument("dmd_rate_hz must be positive");
    }
}

void DetectorModel::validate() const {
    if (!(gain > 0.0)) {
        throw std::invalid_argument("detector gain must be positive");
    }
    if (!(read_noise_sigma >= 0.0)) {
        throw std::invalid_argument("read_noise_sigma must be non-negative");
    }
    if (adc_bits < 1 || adc_bits > 16) {
        throw std::invalid_argument("adc_bits must lie in [1, 16]");
    }
}

void NoiseSpec::validate() const {
    if (!(amplitude >= 0.0)) {
        throw std::invalid_argument("noise amplitude must be non-negative");
    }
    if (!(frequency_hz >= 0.0)) {
        throw std::invalid_argument("noise frequency must be non-negative");
    }
    if (!(offset >= 0.0)) {
        throw std::invalid_argument("noise offset must be non-negative");
    }
}

std::int64_t overlap(std::span<const std::uint8_t> pattern_bits,
                     std::span<const std::uint8_t> mask) {
    if (pattern_bits.size() != mask.size()) {
        throw DimensionMismatch("overlap requires identical dimensions");
    }
    std::int64_t sum = 0;
    for (std::size_t x = 0; x < pattern_bits.size(); ++x) {
        sum += static_cast<std::int64_t>(pattern_bits[x]) & mask[x];
    }
    return sum;
}

std::int64_t overlap(const Pattern& pattern, const SceneMask& mask) {
    if (pattern.width != mask.width || pattern.height != mask.height) {
        throw DimensionMismatch("overlap requires identical dimensions");
    }
    return overlap(std::span<const std::uint8_t>(pattern.bits),
                   std::span<const std::uint8_t>(mask.mask));
}

double noise_sample(const NoiseSpec& spec, const TimingSpec& timing, std::uint64_t n) {
    spec.validate();
    timing.validate();
    if (n < 1) {
        throw std::invalid_argument("measurement ordinal must be >= 1");
    }
    if (spec.waveform == NoiseWaveform::off) {
        return 0.0;
    }
    const double cycles =
        spec.frequency_hz * static_cast<double>(n - 1) / timing.dmd_rate_hz;
    const double phase = cycles - std::floor(cycles); // [0, 1)
    double w = 0.0;
    switch (spec.waveform) {
    case NoiseWaveform::square:
        w = phase < 0.5 ? 0.0 : 1.0;
        break;
    case NoiseWaveform::sine:
        w = 0.5 * (1.0 + std::sin(6.28318530717958647692528676655900577 * phase));
        break;
    case NoiseWaveform::ramp:
        w = phase;
        break;
    case NoiseWaveform::off:
        break;
    }
    return spec.offset + spec.amplitude * w;
}

BucketSample bucket_measure(std::span<const std::uint8_t> pattern_bits,
                            std::span<const std::uint8_t> mask,
                            const DetectorModel& det, double q,
                            std::uint64_t rng_seed, std::uint64_t n,
                            double* optical_out) {
    det.validate();
    const std::int64_t ov = overlap(pattern_bits, mask);
    const std::uint64_t key = rng::derive_key(rng_seed ^ kDetectorDomain, n);

    double optical = det.gain * static_cast<double>(ov);
    if (det.shot_noise) {
        optical = static_cast<double>(rng::poisson(rng::mix64(key ^ kShotStream), optical));
    }
    if (optical_out != nullptr) {
        *optical_out = optical;
    }

    double v = optical + q;
    if (det.read_noise_sigma > 0.0) {
        v += det.read_noise_sigma * rng::gaussian(rng::mix64(key ^ kReadStream), 0);
    }

    const long long rounded = std::llround(v);
    const long long hi = static_cast<long long>(det.max_count());
    BucketSample s;
    s.index = n;
    s.value = static_cast<std::uint64_t>(std::clamp(rounded, 0ll, hi));
    return s;
}

BucketSample bucket_measure(const Pattern& pattern, const SceneMask& mask,
                            const DetectorModel& det, double q,
                            std::uint64_t rng_seed, std::uint64_t n,
                            double* optical_out) {
    if (pattern.width != mask.width || pattern.height != mask.height) {
        throw DimensionMismatch("bucket_measure requires identical dimensions");
    }
    return bucket_measure(std::span<const std::uint8_t>(pattern.bits),
                          std::span<const std::uint8_t>(mask.mask), det, q,
                          rng_seed, n, optical_out);
}

double slow_noise_ratio(std::span<const double> samples, std::span<const double> noise) {
    if (samples.size() != noise.size()) {
        throw DimensionMismatch("series lengths must match");
    }
    if (samples.size() < 2) {
        throw std::invalid_argument("series must hold at least 2 entries");
    }
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
        num += std::fabs(noise[i + 1] - noise[i]);
        den += std::fabs(samples[i + 1] - samples[i]);
    }
    if (num == 0.0) {
        return 0.0; // covers the 0/0 convention
    }
    if (den == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return num / den;
}

} // namespace ispi
