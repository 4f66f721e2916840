#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "core/pattern.hpp"

namespace ispi {

/// Accumulator arithmetic. Exact mode uses a 64-bit accumulator, wide enough
/// that overflow is impossible at the scales this tool targets; fixed(W)
/// emulates a signed W-bit on-chip accumulator with saturating adds.
class AccumulatorMode {
  public:
    static constexpr AccumulatorMode exact() noexcept { return AccumulatorMode(0); }
    static AccumulatorMode fixed(unsigned bits); // 2..63

    bool is_exact() const noexcept { return bits_ == 0; }
    unsigned bits() const noexcept { return bits_; }

    friend bool operator==(AccumulatorMode, AccumulatorMode) = default;

  private:
    explicit constexpr AccumulatorMode(unsigned bits) noexcept : bits_(bits) {}
    unsigned bits_; // 0 = exact
};

/// Reconstructed image; arbitrary signed scale.
struct ReconImage {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::vector<double> values;
};

/// Streaming differential reconstructor. Correlates consecutive differences
/// of bucket samples with consecutive differences of patterns and keeps the
/// running sum per pixel:
///
///   acc[x] += (S_n - S_{n-1}) * (I_n(x) - I_{n-1}(x))
///
/// The entire state is one previous pattern, one previous sample, the
/// accumulator image and counters -- its memory footprint never depends on
/// how many measurements have been consumed. The first measurement of a run
/// only initializes the previous-measurement slot and contributes no term.
class IgiReconstructor {
  public:
    IgiReconstructor(std::uint32_t width, std::uint32_t height,
                     AccumulatorMode mode = AccumulatorMode::exact());

    /// Consumes one measurement. All integer arithmetic; in fixed(W) mode
    /// accumulator additions saturate instead of wrapping and the saturation
    /// flag latches.
    void step(std::int64_t sample, std::span<const std::uint8_t> pattern_bits);

    /// Current image: acc[x] / (2 * pairs_count). Does not mutate state, so
    /// a stream can keep going after a frame is read out. Throws StateError
    /// before any difference pair has been accumulated.
    ReconImage finalize() const;

    /// Starts the next frame: clears the accumulator, pair counter and
    /// saturation flag but keeps the previous measurement, so the next step
    /// differences across the frame boundary.
    void begin_frame() noexcept;

    std::uint32_t width() const noexcept { return width_; }
    std::uint32_t height() const noexcept { return height_; }
    AccumulatorMode mode() const noexcept { return mode_; }
    std::uint64_t pairs_count() const noexcept { return pairs_; }
    std::uint64_t measurements_consumed() const noexcept { return consumed_; }
    bool saturated() const noexcept { return saturated_; }
    std::span<const std::int64_t> accumulator() const noexcept { return acc_; }

    /// Total owned memory. Buffers are sized at construction and never
    /// reallocate, so this value is independent of the stream length.
    std::size_t memory_bytes() const noexcept;

  private:
    template <bool Saturating>
    void accumulate(std::int64_t ds, std::span<const std::uint8_t> bits);

    std::uint32_t width_;
    std::uint32_t height_;
    AccumulatorMode mode_;
    std::int64_t sat_min_;
    std::int64_t sat_max_;
    std::vector<std::uint8_t> prev_bits_;
    std::vector<std::int64_t> acc_;
    std::int64_t prev_sample_ = 0;
    std::uint64_t pairs_ = 0;
    std::uint64_t consumed_ = 0;
    bool has_prev_ = false;
    bool saturated_ = false;
};

/// Batch background-subtraction reference: per pixel
/// (1/N) * sum_i (S_i - <S>) (I_i(x) - <I(x)>) over all N measurements.
/// patterns is row-major packed, count * width * height bits.
ReconImage cgi_reconstruct(std::uint32_t width, std::uint32_t height,
                           std::span<const std::int64_t> samples,
                           std::span<const std::uint8_t> packed_patterns);
ReconImage cgi_reconstruct(std::span<const std::int64_t> samples,
                           std::span<const Pattern> patterns);

/// Splits a continuous measurement stream into frames of exactly
/// measurements_per_frame fresh measurements each, differencing across frame
/// boundaries (the last measurement of frame k initializes frame k+1), so
/// the steady frame cadence is dmd_rate / N. The first frame spends its
/// first measurement on initialization and therefore carries N-1 difference
/// pairs; every later frame carries N.
class FrameStreamer {
  public:
    FrameStreamer(std::uint32_t width, std::uint32_t height, AccumulatorMode mode,
                  std::uint64_t measurements_per_frame); // >= 2

    /// Feeds one measurement; returns the finished frame image when this
    /// measurement completes a frame.
    std::optional<ReconImage> feed(std::int64_t sample,
                                   std::span<const std::uint8_t> pattern_bits);

    std::uint64_t frames_completed() const noexcept { return frames_; }
    std::uint64_t measurements_per_frame() const noexcept { return n_; }
    const IgiReconstructor& reconstructor() const noexcept { return igi_; }

  private:
    IgiReconstructor igi_;
    std::uint64_t n_;
    std::uint64_t in_frame_ = 0;
    std::uint64_t frames_ = 0;
};

} // namespace ispi
