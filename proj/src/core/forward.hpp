#pragma once

#include <cstdint>
#include <span>

#include "core/pattern.hpp"
#include "core/scene.hpp"

namespace ispi {

/// Measurement clock of the simulated DMD.
struct TimingSpec {
    double dmd_rate_hz = 20000.0;

    void validate() const;
};

/// Bucket detector response. The detector integrates gain counts per
/// transmitting-pixel overlap and digitizes with adc_bits, saturating at
/// 2^adc_bits - 1.
struct DetectorModel {
    double gain = 8.0;
    double read_noise_sigma = 1.0; // ADC counts
    std::uint32_t adc_bits = 12;   // 1..16
    bool shot_noise = false;       // Poisson draw on the optical term

    std::uint64_t max_count() const noexcept {
        return (std::uint64_t{1} << adc_bits) - 1;
    }
    void validate() const;
};

enum class NoiseWaveform { off, square, sine, ramp };

/// Additive optical background (the LED shining into the detector).
/// All waveforms are normalized to [0, 1] and scaled by amplitude on top
/// of offset; phase is locked to the measurement clock, tick n at
/// t = (n-1)/dmd_rate.
struct NoiseSpec {
    NoiseWaveform waveform = NoiseWaveform::off;
    double frequency_hz = 0.0;
    double amplitude = 0.0; // ADC counts
    double offset = 0.0;    // ADC counts
    std::uint64_t noise_seed = 0; // reserved for stochastic waveforms

    void validate() const;
};

/// One detector reading, integer ADC counts in [0, 2^adc_bits - 1].
struct BucketSample {
    std::uint64_t index = 0;
    std::uint64_t value = 0;
};

/// Exact transmitted-light overlap sum over pixels of pattern * mask.
std::int64_t overlap(std::span<const std::uint8_t> pattern_bits,
                     std::span<const std::uint8_t> mask);
std::int64_t overlap(const Pattern& pattern, const SceneMask& mask);

/// Background intensity Q_n at measurement tick n (>= 1). Deterministic in
/// (spec, timing, n); waveform off yields 0. The square wave starts in its
/// low half-period, so at frequency dmd_rate/2 it alternates
/// offset, offset+amplitude, ...
double noise_sample(const NoiseSpec& spec, const TimingSpec& timing, std::uint64_t n);

/// Simulates one bucket reading: optical term (gain * overlap, replaced by a
/// Poisson draw of that mean when shot noise is on) plus background q plus
/// Gaussian read noise, rounded half away from zero and clamped to the ADC
/// range. Deterministic for fixed (rng_seed, n). If optical_out is non-null
/// it receives the optical term before background and read noise.
BucketSample bucket_measure(std::span<const std::uint8_t> pattern_bits,
                            std::span<const std::uint8_t> mask,
                            const DetectorModel& det, double q,
                            std::uint64_t rng_seed, std::uint64_t n,
                            double* optical_out = nullptr);
BucketSample bucket_measure(const Pattern& pattern, const SceneMask& mask,
                            const DetectorModel& det, double q,
                            std::uint64_t rng_seed, std::uint64_t n,
                            double* optical_out = nullptr);

/// Slow-noise diagnostic mean|Q_{n+1}-Q_n| / mean|S_{n+1}-S_n| over two
/// equal-length series (>= 2 entries). 0/0 is defined as 0. Values well
/// below 1 indicate the background varies slowly relative to the signal.
double slow_noise_ratio(std::span<const double> samples, std::span<const double> noise);

} // namespace ispi
