/*
 * ispi -- instant single-pixel imaging simulator and reconstruction toolkit.
 *
 * C API of the shared library. All functions return ispi_status; on any
 * failure ispi_last_error() holds a human-readable message for the calling
 * thread. Buffers are caller-owned unless noted; strings returned through
 * char** are released with ispi_string_free().
 */
#ifndef ISPI_H
#define ISPI_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define ISPI_API __declspec(dllexport)
#else
#define ISPI_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ispi_status {
    ISPI_OK = 0,
    ISPI_ERROR_INVALID_ARGUMENT = 1,
    ISPI_ERROR_DIMENSION_MISMATCH = 2,
    ISPI_ERROR_STATE = 3,
    ISPI_ERROR_IO = 4,
    ISPI_ERROR_CONFIG = 5,
    ISPI_ERROR_INTERNAL = 6
} ispi_status;

ISPI_API const char* ispi_status_name(ispi_status status);
ISPI_API const char* ispi_version(void);
/* Message of the last failing call on this thread; empty string if none. */
ISPI_API const char* ispi_last_error(void);

/* ---- pattern stream ---------------------------------------------------- */

typedef struct ispi_pattern_spec {
    uint32_t width;
    uint32_t height;
    double fill_probability;
    uint64_t seed;
} ispi_pattern_spec;

/* Writes the ordinal-th (1-based) pattern into bits (width*height bytes of
 * 0/1, row-major). Deterministic in (seed, ordinal) on every platform. */
ISPI_API ispi_status ispi_pattern_generate(const ispi_pattern_spec* spec,
                                           uint64_t ordinal, uint8_t* bits,
                                           size_t bits_len);

/* diff[i] = newer[i] - older[i], each in {-1, 0, +1}. */
ISPI_API ispi_status ispi_pattern_diff(const uint8_t* older, const uint8_t* newer,
                                       size_t len, int8_t* diff);

/* ---- scene ------------------------------------------------------------- */

/* Centered block-letter T; width and height must be >= 8. mask receives
 * width*height bytes of 0/1 (1 = transmits). */
ISPI_API ispi_status ispi_letter_t_mask(uint32_t width, uint32_t height,
                                        uint8_t* mask, size_t mask_len);

typedef struct ispi_trajectory {
    double speed_mm_s;
    double direction[2]; /* unit vector */
    double pixel_pitch_mm;
    int32_t start_offset[2];
} ispi_trajectory;

/* Translates base by the commanded shift at time t (pixels leaving the field
 * are dropped). out may not alias base. */
ISPI_API ispi_status ispi_mask_at_time(const uint8_t* base, uint32_t width,
                                       uint32_t height, const ispi_trajectory* traj,
                                       double t_seconds, uint8_t* out, size_t out_len);

/* ---- forward model ------------------------------------------------------ */

typedef struct ispi_detector {
    double gain;
    double read_noise_sigma;
    uint32_t adc_bits; /* 1..16 */
    int shot_noise;
} ispi_detector;

typedef enum ispi_waveform {
    ISPI_WAVE_OFF = 0,
    ISPI_WAVE_SQUARE = 1,
    ISPI_WAVE_SINE = 2,
    ISPI_WAVE_RAMP = 3
} ispi_waveform;

typedef struct ispi_noise_spec {
    ispi_waveform waveform;
    double frequency_hz;
    double amplitude;
    double offset;
    uint64_t noise_seed;
} ispi_noise_spec;

/* Exact overlap sum over pixels of pattern * mask. */
ISPI_API ispi_status ispi_overlap(const uint8_t* pattern, const uint8_t* mask,
                                  size_t len, int64_t* out);

/* Background intensity at measurement tick n (1-based). */
ISPI_API ispi_status ispi_noise_sample(const ispi_noise_spec* spec,
                                       double dmd_rate_hz, uint64_t n, double* out);

/* One simulated bucket reading; saturates at 2^adc_bits - 1. */
ISPI_API ispi_status ispi_bucket_measure(const uint8_t* pattern, const uint8_t* mask,
                                         size_t len, const ispi_detector* det,
                                         double background, uint64_t rng_seed,
                                         uint64_t n, uint64_t* value_out);

/* mean|Q_{n+1}-Q_n| / mean|S_{n+1}-S_n| over two series of len >= 2. */
ISPI_API ispi_status ispi_slow_noise_ratio(const double* samples, const double* noise,
                                           size_t len, double* out);

/* ---- streaming reconstruction ------------------------------------------ */

/* Opaque streaming reconstructor. Memory footprint is fixed at creation:
 * one previous pattern, one previous sample, one accumulator image. */
typedef struct ispi_igi ispi_igi;

/* fixed_bits = 0 selects the exact 64-bit accumulator; 2..63 selects a
 * saturating signed fixed-point accumulator of that width. */
ISPI_API ispi_status ispi_igi_create(uint32_t width, uint32_t height,
                                     int32_t fixed_bits, ispi_igi** out);
ISPI_API void ispi_igi_destroy(ispi_igi* igi);

ISPI_API ispi_status ispi_igi_step(ispi_igi* igi, int64_t sample,
                                   const uint8_t* pattern, size_t len);

/* Current image, acc[x] / (2 * pairs); does not mutate the stream state. */
ISPI_API ispi_status ispi_igi_finalize(const ispi_igi* igi, double* image, size_t len);

/* Raw integer accumulator snapshot. */
ISPI_API ispi_status ispi_igi_accumulator(const ispi_igi* igi, int64_t* acc, size_t len);

/* Clears the accumulator but keeps the previous measurement, so the next
 * step differences across the frame boundary. */
ISPI_API ispi_status ispi_igi_begin_frame(ispi_igi* igi);

ISPI_API uint64_t ispi_igi_pairs_count(const ispi_igi* igi);
ISPI_API uint64_t ispi_igi_measurements(const ispi_igi* igi);
ISPI_API int ispi_igi_saturated(const ispi_igi* igi);
ISPI_API size_t ispi_igi_memory_bytes(const ispi_igi* igi);

/* Batch reference: (1/N) sum_i (S_i - <S>)(I_i(x) - <I(x)>). patterns holds
 * count * width * height bytes, one pattern after another. */
ISPI_API ispi_status ispi_cgi_reconstruct(uint32_t width, uint32_t height,
                                          const int64_t* samples,
                                          const uint8_t* patterns, uint64_t count,
                                          double* image, size_t image_len);

/* ---- metrics ------------------------------------------------------------ */

typedef struct ispi_quality {
    double pearson_corr;
    double psnr_db; /* undefined when psnr_is_infinite is nonzero */
    int psnr_is_infinite;
    double mean_signal_region;
    double mean_background_region;
    double cnr; /* undefined when cnr_defined is zero */
    int cnr_defined;
} ispi_quality;

/* Affine min-max map onto [0,255]; constant input maps to uniform 128. */
ISPI_API ispi_status ispi_normalize_8bit(const double* image, size_t len, uint8_t* out);

ISPI_API ispi_status ispi_pearson_corr(const double* image, const uint8_t* truth,
                                       size_t len, double* out);

ISPI_API ispi_status ispi_quality_report(const double* image, const uint8_t* truth_mask,
                                         uint32_t width, uint32_t height,
                                         ispi_quality* out);

/* ---- experiments --------------------------------------------------------- */

/* Frames per second for one image of n measurements at dmd_rate_hz. */
ISPI_API ispi_status ispi_frame_rate(double dmd_rate_hz, uint64_t n, double* fps_out);

/* Experiment drivers. config_json may be NULL or empty for all defaults;
 * seed_override, when non-null, replaces the master seed. Artifacts and
 * report.json are written under out_dir; *report_json_out receives the
 * report document plus a volatile "timing" section (absent from the file).
 */
ISPI_API ispi_status ispi_run_static(const char* config_json, const char* out_dir,
                                     const uint64_t* seed_override,
                                     char** report_json_out);
ISPI_API ispi_status ispi_run_moving(const char* config_json, const char* out_dir,
                                     const uint64_t* seed_override,
                                     char** report_json_out);
ISPI_API ispi_status ispi_run_noise_sweep(const char* config_json, const char* out_dir,
                                          const uint64_t* seed_override,
                                          char** report_json_out);

/* Streaming-step microbenchmark; out_dir may be NULL (report only). */
ISPI_API ispi_status ispi_bench(const char* config_json, const char* out_dir,
                                char** report_json_out);

ISPI_API void ispi_string_free(char* s);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* ISPI_H */
