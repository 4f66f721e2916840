#include "core/rng.hpp"

#include <stdexcept>

namespace ispi::rng {

namespace {

// Sequential inversion; O(mean) draws, used for small means only.
std::uint64_t poisson_inversion(std::uint64_t key, double mean) {
    std::uint64_t k = 0;
    double sum = 0.0;
    std::uint64_t i = 0;
    // sum of exponential inter-arrival times until the mean is exceeded
    for (;;) {
        const double u = static_cast<double>((at(key, i++) >> 11) + 1) * 0x1.0p-53;
        sum += -std::log(u);
        if (sum >= mean) {
            return k;
        }
        ++k;
    }
}

// Hoermann's PTRS transformed-rejection sampler, valid for mean >= 10.
std::uint64_t poisson_ptrs(std::uint64_t key, double mean) {
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);

    std::uint64_t i = 0;
    for (;;) {
        const double u = uniform(key, i++) - 0.5;
        const double v = uniform(key, i++);
        const double us = 0.5 - std::fabs(u);
        const double kd = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= v_r) {
            return static_cast<std::uint64_t>(kd);
        }
        if (kd < 0.0 || (us < 0.013 && v > us)) {
            continue;
        }
        const double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
        const double rhs = kd * loglam - mean - std::lgamma(kd + 1.0);
        if (lhs <= rhs) {
            return static_cast<std::uint64_t>(kd);
        }
    }
}

} // namespace

std::uint64_t poisson(std::uint64_t key, double mean) {
    if (!(mean >= 0.0)) {
        throw std::invalid_argument("poisson mean must be non-negative");
    }
    if (mean == 0.0) {
        return 0;
    }
    if (mean < 30.0) {
        return poisson_inversion(key, mean);
    }
    return poisson_ptrs(key, mean);
}

} // namespace ispi::rng
