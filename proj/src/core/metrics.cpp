#include "core/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "core/errors.hpp"

namespace ispi {

std::vector<std::uint8_t> normalize_8bit(std::span<const double> values) {
    std::vector<std::uint8_t> out(values.size(), 128);
    if (values.empty()) {
        return out;
    }
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    if (!(hi > lo)) {
        return out; // constant image convention
    }
    const double scale = 255.0 / (hi - lo);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const long long v = std::llround((values[i] - lo) * scale);
        out[i] = static_cast<std::uint8_t>(std::clamp(v, 0ll, 255ll));
    }
    return out;
}

double pearson_corr(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw DimensionMismatch("correlation inputs must have equal length");
    }
    if (a.size() < 2) {
        throw std::invalid_argument("correlation needs at least 2 values");
    }
    const double n = static_cast<double>(a.size());
    double mean_a = 0.0;
    double mean_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        mean_a += a[i];
        mean_b += b[i];
    }
    mean_a /= n;
    mean_b /= n;
    double saa = 0.0;
    double sbb = 0.0;
    double sab = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - mean_a;
        const double db = b[i] - mean_b;
        saa += da * da;
        sbb += db * db;
        sab += da * db;
    }
    if (saa == 0.0 || sbb == 0.0) {
        throw std::invalid_argument("correlation undefined for constant input");
    }
    return sab / std::sqrt(saa * sbb);
}

double pearson_corr(const ReconImage& img, const SceneMask& truth) {
    if (img.width != truth.width || img.height != truth.height) {
        throw DimensionMismatch("image and mask dimensions must match");
    }
    std::vector<double> t(truth.mask.begin(), truth.mask.end());
    return pearson_corr(img.values, t);
}

QualityReport quality_report(const ReconImage& img, const SceneMask& truth) {
    if (img.width != truth.width || img.height != truth.height ||
        img.values.size() != truth.mask.size()) {
        throw DimensionMismatch("image and mask dimensions must match");
    }
    const std::size_t transmit = truth.transmitting_count();
    if (transmit == 0 || transmit == truth.mask.size()) {
        throw std::invalid_argument("mask is degenerate (all-transmit or all-opaque)");
    }

    QualityReport r;
    r.pearson_corr = pearson_corr(img, truth);

    const auto na = normalize_8bit(img.values);
    std::vector<double> t(truth.mask.begin(), truth.mask.end());
    const auto nb = normalize_8bit(t);
    double mse = 0.0;
    for (std::size_t i = 0; i < na.size(); ++i) {
        const double d = static_cast<double>(na[i]) - static_cast<double>(nb[i]);
        mse += d * d;
    }
    mse /= static_cast<double>(na.size());
    r.psnr_db = mse == 0.0 ? std::numeric_limits<double>::infinity()
                           : 10.0 * std::log10(255.0 * 255.0 / mse);

    double sum_sig = 0.0;
    double sum_bg = 0.0;
    for (std::size_t i = 0; i < img.values.size(); ++i) {
        (truth.mask[i] ? sum_sig : sum_bg) += img.values[i];
    }
    const double n_sig = static_cast<double>(transmit);
    const double n_bg = static_cast<double>(truth.mask.size() - transmit);
    r.mean_signal_region = sum_sig / n_sig;
    r.mean_background_region = sum_bg / n_bg;

    double var_bg = 0.0;
    for (std::size_t i = 0; i < img.values.size(); ++i) {
        if (!truth.mask[i]) {
            const double d = img.values[i] - r.mean_background_region;
            var_bg += d * d;
        }
    }
    const double std_bg = std::sqrt(var_bg / n_bg);
    if (std_bg > 0.0) {
        r.cnr = (r.mean_signal_region - r.mean_background_region) / std_bg;
    }
    return r;
}

} // namespace ispi
