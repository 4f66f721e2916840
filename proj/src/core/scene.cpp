#include "core/scene.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "core/errors.hpp"

namespace ispi {

std::size_t SceneMask::transmitting_count() const noexcept {
    return static_cast<std::size_t>(
        std::accumulate(mask.begin(), mask.end(), std::uint64_t{0}));
}

SceneMask make_letter_t(std::uint32_t width, std::uint32_t height) {
    if (width < 8 || height < 8) {
        throw std::invalid_argument("letter T needs at least an 8x8 field");
    }
    SceneMask out;
    out.width = width;
    out.height = height;
    out.mask.assign(static_cast<std::size_t>(width) * height, 0);

    // Integer forms of the glyph rule keep the geometry exact:
    // round(0.6*w) = (6w+5)/10 (3w/5 never lands on .5), floor(0.8*h) = 4h/5.
    const std::uint32_t bar_thick = (height + 4) / 5;
    const std::uint32_t stem_thick = (width + 4) / 5;
    const std::uint32_t bar_width = (6 * width + 5) / 10;
    const std::uint32_t bar_top = (height - bar_thick) / 2;
    const std::uint32_t bar_col0 = (width - bar_width) / 2;
    const std::uint32_t stem_col0 = (width - stem_thick) / 2;
    const std::uint32_t stem_row0 = bar_top + bar_thick;
    const std::uint32_t stem_row_end = 4 * height / 5; // exclusive

    for (std::uint32_t r = bar_top; r < bar_top + bar_thick; ++r) {
        for (std::uint32_t c = bar_col0; c < bar_col0 + bar_width; ++c) {
            out.mask[static_cast<std::size_t>(r) * width + c] = 1;
        }
    }
    for (std::uint32_t r = stem_row0; r < stem_row_end && r < height; ++r) {
        for (std::uint32_t c = stem_col0; c < stem_col0 + stem_thick; ++c) {
            out.mask[static_cast<std::size_t>(r) * width + c] = 1;
        }
    }
    return out;
}

void Trajectory::validate() const {
    if (!(speed_mm_s >= 0.0)) {
        throw std::invalid_argument("trajectory speed must be non-negative");
    }
    if (!(pixel_pitch_mm > 0.0)) {
        throw std::invalid_argument("pixel pitch must be positive");
    }
    const double norm = std::hypot(direction_x, direction_y);
    if (std::fabs(norm - 1.0) > 1e-9) {
        throw std::invalid_argument("trajectory direction must be a unit vector");
    }
}

PixelShift commanded_shift(const Trajectory& traj, double t_seconds) {
    traj.validate();
    if (!(t_seconds >= 0.0)) {
        throw std::invalid_argument("time must be non-negative");
    }
    const double pixels = traj.speed_mm_s * t_seconds / traj.pixel_pitch_mm;
    PixelShift s;
    s.dx = std::llround(pixels * traj.direction_x) + traj.start_dx;
    s.dy = std::llround(pixels * traj.direction_y) + traj.start_dy;
    return s;
}

SceneMask translate(const SceneMask& base, std::int64_t dx, std::int64_t dy) {
    SceneMask out;
    out.width = base.width;
    out.height = base.height;
    out.mask.assign(base.mask.size(), 0);
    const std::int64_t w = base.width;
    const std::int64_t h = base.height;
    for (std::int64_t r = 0; r < h; ++r) {
        const std::int64_t sr = r - dy;
        if (sr < 0 || sr >= h) {
            continue;
        }
        for (std::int64_t c = 0; c < w; ++c) {
            const std::int64_t sc = c - dx;
            if (sc < 0 || sc >= w) {
                continue;
            }
            out.mask[static_cast<std::size_t>(r * w + c)] =
                base.mask[static_cast<std::size_t>(sr * w + sc)];
        }
    }
    return out;
}

SceneMask mask_at_time(const SceneMask& base, const Trajectory& traj, double t_seconds) {
    const PixelShift s = commanded_shift(traj, t_seconds);
    return translate(base, s.dx, s.dy);
}

} // namespace ispi
