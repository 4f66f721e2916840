#include "ispi/ispi.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "core/errors.hpp"
#include "core/experiment.hpp"
#include "core/forward.hpp"
#include "core/metrics.hpp"
#include "core/pattern.hpp"
#include "core/reconstruct.hpp"
#include "core/scene.hpp"
#include "core/version.hpp"

struct ispi_igi {
    ispi::IgiReconstructor impl;
};

namespace {

thread_local std::string t_last_error;

void set_error(const char* what) {
    t_last_error = what != nullptr ? what : "";
}

template <typename Fn>
ispi_status wrap(Fn&& fn) noexcept {
    try {
        fn();
        return ISPI_OK;
    } catch (const ispi::DimensionMismatch& e) {
        set_error(e.what());
        return ISPI_ERROR_DIMENSION_MISMATCH;
    } catch (const ispi::ConfigError& e) {
        set_error(e.what());
        return ISPI_ERROR_CONFIG;
    } catch (const ispi::StateError& e) {
        set_error(e.what());
        return ISPI_ERROR_STATE;
    } catch (const ispi::IoError& e) {
        set_error(e.what());
        return ISPI_ERROR_IO;
    } catch (const std::invalid_argument& e) {
        set_error(e.what());
        return ISPI_ERROR_INVALID_ARGUMENT;
    } catch (const std::exception& e) {
        set_error(e.what());
        return ISPI_ERROR_INTERNAL;
    } catch (...) {
        set_error("unknown error");
        return ISPI_ERROR_INTERNAL;
    }
}

ispi_status null_arg(const char* what) {
    set_error(what);
    return ISPI_ERROR_INVALID_ARGUMENT;
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out == nullptr) {
        throw std::bad_alloc();
    }
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

ispi::PatternSpec to_spec(const ispi_pattern_spec& s) {
    ispi::PatternSpec spec;
    spec.width = s.width;
    spec.height = s.height;
    spec.fill_probability = s.fill_probability;
    spec.seed = s.seed;
    return spec;
}

ispi::DetectorModel to_detector(const ispi_detector& d) {
    ispi::DetectorModel det;
    det.gain = d.gain;
    det.read_noise_sigma = d.read_noise_sigma;
    det.adc_bits = d.adc_bits;
    det.shot_noise = d.shot_noise != 0;
    return det;
}

ispi::NoiseSpec to_noise(const ispi_noise_spec& n) {
    ispi::NoiseSpec spec;
    switch (n.waveform) {
    case ISPI_WAVE_OFF:
        spec.waveform = ispi::NoiseWaveform::off;
        break;
    case ISPI_WAVE_SQUARE:
        spec.waveform = ispi::NoiseWaveform::square;
        break;
    case ISPI_WAVE_SINE:
        spec.waveform = ispi::NoiseWaveform::sine;
        break;
    case ISPI_WAVE_RAMP:
        spec.waveform = ispi::NoiseWaveform::ramp;
        break;
    default:
        throw std::invalid_argument("unknown waveform enumerator");
    }
    spec.frequency_hz = n.frequency_hz;
    spec.amplitude = n.amplitude;
    spec.offset = n.offset;
    spec.noise_seed = n.noise_seed;
    return spec;
}

using RunFn = ispi::RunOutcome (*)(const ispi::ExperimentConfig&,
                                   const std::filesystem::path&);

ispi_status run_experiment(RunFn run, const char* config_json, const char* out_dir,
                           const uint64_t* seed_override, char** report_json_out) {
    if (out_dir == nullptr) {
        return null_arg("out_dir must not be null");
    }
    return wrap([&] {
        const ispi::ExperimentConfig cfg = ispi::ExperimentConfig::from_json_text(
            config_json != nullptr ? config_json : "", seed_override);
        ispi::RunOutcome outcome = run(cfg, out_dir);
        if (report_json_out != nullptr) {
            nlohmann::ordered_json full = outcome.report;
            full["timing"] = outcome.timing;
            *report_json_out = dup_string(full.dump(2) + "\n");
        }
    });
}

} // namespace

extern "C" {

const char* ispi_status_name(ispi_status status) {
    switch (status) {
    case ISPI_OK:
        return "ok";
    case ISPI_ERROR_INVALID_ARGUMENT:
        return "invalid argument";
    case ISPI_ERROR_DIMENSION_MISMATCH:
        return "dimension mismatch";
    case ISPI_ERROR_STATE:
        return "invalid state";
    case ISPI_ERROR_IO:
        return "i/o error";
    case ISPI_ERROR_CONFIG:
        return "config error";
    case ISPI_ERROR_INTERNAL:
        return "internal error";
    }
    return "unknown";
}

const char* ispi_version(void) {
    return ispi::kToolVersion.data();
}

const char* ispi_last_error(void) {
    return t_last_error.c_str();
}

ispi_status ispi_pattern_generate(const ispi_pattern_spec* spec, uint64_t ordinal,
                                  uint8_t* bits, size_t bits_len) {
    if (spec == nullptr || bits == nullptr) {
        return null_arg("spec and bits must not be null");
    }
    return wrap([&] {
        ispi::gen_pattern_into(to_spec(*spec), ordinal, std::span(bits, bits_len));
    });
}

ispi_status ispi_pattern_diff(const uint8_t* older, const uint8_t* newer, size_t len,
                              int8_t* diff) {
    if (older == nullptr || newer == nullptr || diff == nullptr) {
        return null_arg("pattern buffers must not be null");
    }
    return wrap([&] {
        for (size_t i = 0; i < len; ++i) {
            diff[i] = static_cast<int8_t>(static_cast<int>(newer[i]) -
                                          static_cast<int>(older[i]));
        }
    });
}

ispi_status ispi_letter_t_mask(uint32_t width, uint32_t height, uint8_t* mask,
                               size_t mask_len) {
    if (mask == nullptr) {
        return null_arg("mask must not be null");
    }
    return wrap([&] {
        const ispi::SceneMask m = ispi::make_letter_t(width, height);
        if (mask_len != m.mask.size()) {
            throw ispi::DimensionMismatch("mask buffer size does not match dimensions");
        }
        std::memcpy(mask, m.mask.data(), m.mask.size());
    });
}

ispi_status ispi_mask_at_time(const uint8_t* base, uint32_t width, uint32_t height,
                              const ispi_trajectory* traj, double t_seconds,
                              uint8_t* out, size_t out_len) {
    if (base == nullptr || traj == nullptr || out == nullptr) {
        return null_arg("base, traj and out must not be null");
    }
    return wrap([&] {
        const size_t n = static_cast<size_t>(width) * height;
        if (out_len != n) {
            throw ispi::DimensionMismatch("output buffer size does not match dimensions");
        }
        ispi::SceneMask m;
        m.width = width;
        m.height = height;
        m.mask.assign(base, base + n);
        ispi::Trajectory t;
        t.speed_mm_s = traj->speed_mm_s;
        t.direction_x = traj->direction[0];
        t.direction_y = traj->direction[1];
        t.pixel_pitch_mm = traj->pixel_pitch_mm;
        t.start_dx = traj->start_offset[0];
        t.start_dy = traj->start_offset[1];
        const ispi::SceneMask shifted = ispi::mask_at_time(m, t, t_seconds);
        std::memcpy(out, shifted.mask.data(), n);
    });
}

ispi_status ispi_overlap(const uint8_t* pattern, const uint8_t* mask, size_t len,
                         int64_t* out) {
    if (pattern == nullptr || mask == nullptr || out == nullptr) {
        return null_arg("pattern, mask and out must not be null");
    }
    return wrap([&] {
        *out = ispi::overlap(std::span(pattern, len), std::span(mask, len));
    });
}

ispi_status ispi_noise_sample(const ispi_noise_spec* spec, double dmd_rate_hz,
                              uint64_t n, double* out) {
    if (spec == nullptr || out == nullptr) {
        return null_arg("spec and out must not be null");
    }
    return wrap([&] {
        ispi::TimingSpec timing;
        timing.dmd_rate_hz = dmd_rate_hz;
        *out = ispi::noise_sample(to_noise(*spec), timing, n);
    });
}

ispi_status ispi_bucket_measure(const uint8_t* pattern, const uint8_t* mask, size_t len,
                                const ispi_detector* det, double background,
                                uint64_t rng_seed, uint64_t n, uint64_t* value_out) {
    if (pattern == nullptr || mask == nullptr || det == nullptr || value_out == nullptr) {
        return null_arg("pattern, mask, detector and out must not be null");
    }
    return wrap([&] {
        const ispi::BucketSample s =
            ispi::bucket_measure(std::span(pattern, len), std::span(mask, len),
                                 to_detector(*det), background, rng_seed, n);
        *value_out = s.value;
    });
}

ispi_status ispi_slow_noise_ratio(const double* samples, const double* noise, size_t len,
                                  double* out) {
    if (samples == nullptr || noise == nullptr || out == nullptr) {
        return null_arg("series and out must not be null");
    }
    return wrap([&] {
        *out = ispi::slow_noise_ratio(std::span(samples, len), std::span(noise, len));
    });
}

ispi_status ispi_igi_create(uint32_t width, uint32_t height, int32_t fixed_bits,
                            ispi_igi** out) {
    if (out == nullptr) {
        return null_arg("out must not be null");
    }
    *out = nullptr;
    return wrap([&] {
        const ispi::AccumulatorMode mode =
            fixed_bits == 0 ? ispi::AccumulatorMode::exact()
                            : ispi::AccumulatorMode::fixed(
                                  fixed_bits > 0 ? static_cast<unsigned>(fixed_bits) : 0u);
        *out = new ispi_igi{ispi::IgiReconstructor(width, height, mode)};
    });
}

void ispi_igi_destroy(ispi_igi* igi) {
    delete igi;
}

ispi_status ispi_igi_step(ispi_igi* igi, int64_t sample, const uint8_t* pattern,
                          size_t len) {
    if (igi == nullptr || pattern == nullptr) {
        return null_arg("reconstructor and pattern must not be null");
    }
    return wrap([&] { igi->impl.step(sample, std::span(pattern, len)); });
}

ispi_status ispi_igi_finalize(const ispi_igi* igi, double* image, size_t len) {
    if (igi == nullptr || image == nullptr) {
        return null_arg("reconstructor and image must not be null");
    }
    return wrap([&] {
        const ispi::ReconImage img = igi->impl.finalize();
        if (len != img.values.size()) {
            throw ispi::DimensionMismatch("image buffer size does not match dimensions");
        }
        std::memcpy(image, img.values.data(), len * sizeof(double));
    });
}

ispi_status ispi_igi_accumulator(const ispi_igi* igi, int64_t* acc, size_t len) {
    if (igi == nullptr || acc == nullptr) {
        return null_arg("reconstructor and acc must not be null");
    }
    return wrap([&] {
        const std::span<const std::int64_t> a = igi->impl.accumulator();
        if (len != a.size()) {
            throw ispi::DimensionMismatch("accumulator buffer size does not match");
        }
        std::memcpy(acc, a.data(), len * sizeof(int64_t));
    });
}

ispi_status ispi_igi_begin_frame(ispi_igi* igi) {
    if (igi == nullptr) {
        return null_arg("reconstructor must not be null");
    }
    igi->impl.begin_frame();
    return ISPI_OK;
}

uint64_t ispi_igi_pairs_count(const ispi_igi* igi) {
    return igi != nullptr ? igi->impl.pairs_count() : 0;
}

uint64_t ispi_igi_measurements(const ispi_igi* igi) {
    return igi != nullptr ? igi->impl.measurements_consumed() : 0;
}

int ispi_igi_saturated(const ispi_igi* igi) {
    return igi != nullptr && igi->impl.saturated() ? 1 : 0;
}

size_t ispi_igi_memory_bytes(const ispi_igi* igi) {
    return igi != nullptr ? igi->impl.memory_bytes() : 0;
}

ispi_status ispi_cgi_reconstruct(uint32_t width, uint32_t height, const int64_t* samples,
                                 const uint8_t* patterns, uint64_t count, double* image,
                                 size_t image_len) {
    if (samples == nullptr || patterns == nullptr || image == nullptr) {
        return null_arg("samples, patterns and image must not be null");
    }
    return wrap([&] {
        const size_t pixels = static_cast<size_t>(width) * height;
        if (image_len != pixels) {
            throw ispi::DimensionMismatch("image buffer size does not match dimensions");
        }
        const ispi::ReconImage img = ispi::cgi_reconstruct(
            width, height, std::span(samples, count), std::span(patterns, count * pixels));
        std::memcpy(image, img.values.data(), pixels * sizeof(double));
    });
}

ispi_status ispi_normalize_8bit(const double* image, size_t len, uint8_t* out) {
    if (image == nullptr || out == nullptr) {
        return null_arg("image and out must not be null");
    }
    return wrap([&] {
        const std::vector<uint8_t> n = ispi::normalize_8bit(std::span(image, len));
        std::memcpy(out, n.data(), n.size());
    });
}

ispi_status ispi_pearson_corr(const double* image, const uint8_t* truth, size_t len,
                              double* out) {
    if (image == nullptr || truth == nullptr || out == nullptr) {
        return null_arg("image, truth and out must not be null");
    }
    return wrap([&] {
        std::vector<double> t(truth, truth + len);
        *out = ispi::pearson_corr(std::span(image, len), std::span<const double>(t));
    });
}

ispi_status ispi_quality_report(const double* image, const uint8_t* truth_mask,
                                uint32_t width, uint32_t height, ispi_quality* out) {
    if (image == nullptr || truth_mask == nullptr || out == nullptr) {
        return null_arg("image, mask and out must not be null");
    }
    return wrap([&] {
        const size_t pixels = static_cast<size_t>(width) * height;
        ispi::ReconImage img;
        img.width = width;
        img.height = height;
        img.values.assign(image, image + pixels);
        ispi::SceneMask mask;
        mask.width = width;
        mask.height = height;
        mask.mask.assign(truth_mask, truth_mask + pixels);
        const ispi::QualityReport q = ispi::quality_report(img, mask);
        out->pearson_corr = q.pearson_corr;
        out->psnr_is_infinite = std::isinf(q.psnr_db) ? 1 : 0;
        out->psnr_db = out->psnr_is_infinite ? 0.0 : q.psnr_db;
        out->mean_signal_region = q.mean_signal_region;
        out->mean_background_region = q.mean_background_region;
        out->cnr_defined = q.cnr.has_value() ? 1 : 0;
        out->cnr = q.cnr.value_or(0.0);
    });
}

ispi_status ispi_frame_rate(double dmd_rate_hz, uint64_t n, double* fps_out) {
    if (fps_out == nullptr) {
        return null_arg("fps_out must not be null");
    }
    return wrap([&] { *fps_out = ispi::frame_rate(dmd_rate_hz, n); });
}

ispi_status ispi_run_static(const char* config_json, const char* out_dir,
                            const uint64_t* seed_override, char** report_json_out) {
    return run_experiment(&ispi::run_static, config_json, out_dir, seed_override,
                          report_json_out);
}

ispi_status ispi_run_moving(const char* config_json, const char* out_dir,
                            const uint64_t* seed_override, char** report_json_out) {
    return run_experiment(&ispi::run_moving, config_json, out_dir, seed_override,
                          report_json_out);
}

ispi_status ispi_run_noise_sweep(const char* config_json, const char* out_dir,
                                 const uint64_t* seed_override, char** report_json_out) {
    return run_experiment(&ispi::run_noise_sweep, config_json, out_dir, seed_override,
                          report_json_out);
}

ispi_status ispi_bench(const char* config_json, const char* out_dir,
                       char** report_json_out) {
    return wrap([&] {
        const ispi::ExperimentConfig cfg = ispi::ExperimentConfig::from_json_text(
            config_json != nullptr ? config_json : "");
        const std::filesystem::path dir = out_dir != nullptr ? out_dir : "";
        const nlohmann::ordered_json report =
            ispi::bench(cfg, out_dir != nullptr ? &dir : nullptr);
        if (report_json_out != nullptr) {
            *report_json_out = dup_string(report.dump(2) + "\n");
        }
    });
}

void ispi_string_free(char* s) {
    std::free(s);
}

} // extern "C"
