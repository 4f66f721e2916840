#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "core/reconstruct.hpp"
#include "core/scene.hpp"

namespace ispi {

/// Scalar image-quality summary against a known ground-truth mask.
struct QualityReport {
    double pearson_corr = 0.0;
    double psnr_db = 0.0; // +infinity when the normalized images are identical
    double mean_signal_region = 0.0;
    double mean_background_region = 0.0;
    std::optional<double> cnr; // absent when undefined
};

/// Affine min-max map of values onto [0, 255], rounding half away from zero.
/// A constant input maps to uniform 128.
std::vector<std::uint8_t> normalize_8bit(std::span<const double> values);

/// Pearson correlation over pixels. Throws std::invalid_argument when either
/// input is constant (correlation undefined).
double pearson_corr(std::span<const double> a, std::span<const double> b);
double pearson_corr(const ReconImage& img, const SceneMask& truth);

/// Full report: correlation, PSNR between the 8-bit normalized images,
/// region means over the raw image, and CNR
/// (mean_signal - mean_background) / std_background. CNR is reported absent
/// when the background has zero spread. Throws on degenerate masks
/// (all-transmit or all-opaque) or a constant image.
QualityReport quality_report(const ReconImage& img, const SceneMask& truth);

} // namespace ispi
