#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "core/forward.hpp"
#include "core/metrics.hpp"
#include "core/pattern.hpp"
#include "core/reconstruct.hpp"
#include "core/scene.hpp"

namespace ispi {

struct SceneConfig {
    enum class Source { letter_t, file };
    Source source = Source::letter_t;
    std::filesystem::path mask_file;
};

struct OutputConfig {
    bool write_traces = true;
    bool dump_patterns = false;
};

/// Complete description of one experiment. Every field has a default; an
/// empty JSON document yields the stock 32x32 letter-T setup (20 kHz DMD,
/// N sweep 800..4000, exact accumulator).
struct ExperimentConfig {
    PatternSpec pattern;
    SceneConfig scene;
    std::optional<Trajectory> trajectory;
    TimingSpec timing;
    DetectorModel detector;
    NoiseSpec noise;
    std::vector<NoiseSpec> noise_sweep;
    AccumulatorMode mode = AccumulatorMode::exact();
    std::uint64_t n_per_frame = 800;
    std::vector<std::uint64_t> n_sweep = {800, 1600, 2400, 3200, 4000};
    std::uint64_t n_noise = 4000;
    std::uint64_t frame_count = 50;
    std::uint64_t seed = 42; // master seed: detector rng stream, default pattern seed
    bool with_cgi = false;
    OutputConfig output;

    void validate() const;

    /// Parses a config document; unknown keys are rejected. text may be
    /// empty for all-defaults. seed_override, when non-null, replaces the
    /// master seed before defaults are resolved.
    static ExperimentConfig from_json_text(std::string_view text,
                                           const std::uint64_t* seed_override = nullptr);
    static ExperimentConfig from_json(const nlohmann::json& j,
                                      const std::uint64_t* seed_override = nullptr);

    /// Resolved-config echo embedded in every report.
    nlohmann::ordered_json echo() const;
};

/// Frames per second when one image takes n measurements at dmd_rate_hz.
double frame_rate(double dmd_rate_hz, std::uint64_t n_per_frame);

/// The default moving-object trajectory: 0.1 mm/s toward the upper left,
/// 0.05 mm/pixel pitch.
Trajectory default_moving_trajectory();

/// The default noise sweep: no noise plus square-wave backgrounds from the
/// slow regime to half the measurement rate, amplitude at the clean-signal
/// mean of the stock configuration.
std::vector<NoiseSpec> default_noise_sweep();

/// Loads (or builds) the scene mask and checks it against the pattern shape.
SceneMask resolve_scene(const ExperimentConfig& cfg);

/// Flat five-field JSON form of a quality report; infinite PSNR and absent
/// CNR serialize as null.
nlohmann::ordered_json quality_to_json(const QualityReport& q);

struct RunOutcome {
    nlohmann::ordered_json report; // exactly what report.json contains
    nlohmann::ordered_json timing; // wall-clock info; never written to disk
};

/// Static N-sweep: one reconstruction per entry of n_sweep, quality-scored
/// against the scene mask. Writes frames/, traces/ and report.json under
/// out_dir. Rejects configs with a trajectory.
RunOutcome run_static(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

/// Moving-object video: frame_count frames of n_per_frame measurements each,
/// object resampled at every frame start time. The report carries the
/// commanded per-frame pixel offsets as ground truth and a frame manifest
/// with the playback rate.
RunOutcome run_moving(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

/// Runs the streaming and batch reconstructions over the identical sample
/// stream for every entry of noise_sweep, recording signal traces, both
/// images, quality reports, the slow-noise diagnostic and a stream checksum
/// proving both consumed the same data.
RunOutcome run_noise_sweep(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

/// Microbenchmark of the streaming step. Reports sustained steps/second,
/// verifies the per-step cost is flat in stream length (10^4 vs 10^5 steps
/// within 20%) and that doubling the pixel count scales the per-step cost by
/// 2x +- 50%. Throws StateError with the measured numbers when a check
/// fails (after writing the report, when a directory is given).
nlohmann::ordered_json bench(const ExperimentConfig& cfg,
                             const std::filesystem::path* out_dir = nullptr);

/// FNV-1a 64-bit checksum.
std::uint64_t fnv1a64(const void* data, std::size_t len);

/// Worker cap for the frame pool: ISPI_THREADS when set and nonzero,
/// otherwise the hardware concurrency.
unsigned thread_cap();

/// Runs fn(0..count-1) on the capped pool; rethrows the first failure.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

} // namespace ispi
