#pragma once

#include <cstdint>
#include <vector>

namespace ispi {

/// Binary transmission object; 1 = transmits light, 0 = opaque.
/// Row-major, same indexing as Pattern.
struct SceneMask {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::vector<std::uint8_t> mask;

    std::size_t transmitting_count() const noexcept;
};

/// Builds the centered block-letter T test object. The horizontal bar spans
/// the middle 60% of the width with thickness ceil(height/5) and is centered
/// vertically; the stem (thickness ceil(width/5)) descends from the bar to
/// 80% of the height. Requires width >= 8 and height >= 8.
SceneMask make_letter_t(std::uint32_t width, std::uint32_t height);

/// Rigid motion of the object, quantized to whole pixels per frame.
struct Trajectory {
    double speed_mm_s = 0.0;
    double direction_x = 1.0; // unit vector
    double direction_y = 0.0;
    double pixel_pitch_mm = 0.05;
    std::int32_t start_dx = 0;
    std::int32_t start_dy = 0;

    void validate() const;
};

struct PixelShift {
    std::int64_t dx = 0;
    std::int64_t dy = 0;
};

/// Commanded integer shift at time t: round(speed*t/pitch * direction),
/// component-wise half-away-from-zero, plus the start offset.
PixelShift commanded_shift(const Trajectory& traj, double t_seconds);

/// Translates the mask by (dx, dy) pixels. Pixels shifted off the field are
/// dropped; vacated pixels become opaque.
SceneMask translate(const SceneMask& base, std::int64_t dx, std::int64_t dy);

/// Object position at time t >= 0 along its trajectory.
SceneMask mask_at_time(const SceneMask& base, const Trajectory& traj, double t_seconds);

} // namespace ispi
