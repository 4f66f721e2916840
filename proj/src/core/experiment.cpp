#include "core/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <thread>

#include "core/errors.hpp"
#include "core/image_io.hpp"
#include "core/rng.hpp"
#include "core/version.hpp"

namespace ispi {

namespace {

using njson = nlohmann::json;
using ojson = nlohmann::ordered_json;

[[noreturn]] void config_fail(const std::string& path, const std::string& what) {
    throw ConfigError("config: " + path + ": " + what);
}

void check_keys(const njson& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
    if (!j.is_object()) {
        config_fail(path, "expected an object");
    }
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) {
            if (key == a) {
                ok = true;
                break;
            }
        }
        if (!ok) {
            config_fail(path + "." + key, "unknown key");
        }
    }
}

double get_double(const njson& j, const char* key, double def, const std::string& path) {
    if (!j.contains(key) || j.at(key).is_null()) {
        return def;
    }
    const njson& v = j.at(key);
    if (!v.is_number()) {
        config_fail(path + "." + key, "expected a number");
    }
    return v.get<double>();
}

std::uint64_t get_u64(const njson& j, const char* key, std::uint64_t def,
                      const std::string& path) {
    if (!j.contains(key) || j.at(key).is_null()) {
        return def;
    }
    const njson& v = j.at(key);
    if (!v.is_number_unsigned()) {
        config_fail(path + "." + key, "expected an unsigned integer");
    }
    return v.get<std::uint64_t>();
}

std::uint32_t get_u32(const njson& j, const char* key, std::uint32_t def,
                      const std::string& path) {
    const std::uint64_t v = get_u64(j, key, def, path);
    if (v > 0xFFFFFFFFull) {
        config_fail(path + "." + key, "value out of range");
    }
    return static_cast<std::uint32_t>(v);
}

bool get_bool(const njson& j, const char* key, bool def, const std::string& path) {
    if (!j.contains(key) || j.at(key).is_null()) {
        return def;
    }
    const njson& v = j.at(key);
    if (!v.is_boolean()) {
        config_fail(path + "." + key, "expected a boolean");
    }
    return v.get<bool>();
}

std::string get_string(const njson& j, const char* key, std::string def,
                       const std::string& path) {
    if (!j.contains(key) || j.at(key).is_null()) {
        return def;
    }
    const njson& v = j.at(key);
    if (!v.is_string()) {
        config_fail(path + "." + key, "expected a string");
    }
    return v.get<std::string>();
}

const char* waveform_name(NoiseWaveform w) {
    switch (w) {
    case NoiseWaveform::off:
        return "off";
    case NoiseWaveform::square:
        return "square";
    case NoiseWaveform::sine:
        return "sine";
    case NoiseWaveform::ramp:
        return "ramp";
    }
    return "off";
}

NoiseWaveform parse_waveform(const std::string& s, const std::string& path) {
    if (s == "off") {
        return NoiseWaveform::off;
    }
    if (s == "square") {
        return NoiseWaveform::square;
    }
    if (s == "sine") {
        return NoiseWaveform::sine;
    }
    if (s == "ramp") {
        return NoiseWaveform::ramp;
    }
    config_fail(path, "unknown waveform '" + s + "' (off|square|sine|ramp)");
}

NoiseSpec parse_noise(const njson& j, const std::string& path, std::uint64_t default_seed) {
    check_keys(j, path, {"waveform", "frequency_hz", "amplitude", "offset", "noise_seed"});
    NoiseSpec n;
    n.waveform = parse_waveform(get_string(j, "waveform", "off", path), path + ".waveform");
    n.frequency_hz = get_double(j, "frequency_hz", 0.0, path);
    n.amplitude = get_double(j, "amplitude", 0.0, path);
    n.offset = get_double(j, "offset", 0.0, path);
    n.noise_seed = get_u64(j, "noise_seed", default_seed, path);
    return n;
}

ojson noise_to_json(const NoiseSpec& n) {
    ojson j;
    j["waveform"] = waveform_name(n.waveform);
    j["frequency_hz"] = n.frequency_hz;
    j["amplitude"] = n.amplitude;
    j["offset"] = n.offset;
    j["noise_seed"] = n.noise_seed;
    return j;
}

Trajectory parse_trajectory(const njson& j, const std::string& path) {
    check_keys(j, path, {"speed_mm_s", "direction", "pixel_pitch_mm", "start_offset"});
    Trajectory t = default_moving_trajectory();
    t.speed_mm_s = get_double(j, "speed_mm_s", t.speed_mm_s, path);
    t.pixel_pitch_mm = get_double(j, "pixel_pitch_mm", t.pixel_pitch_mm, path);
    if (j.contains("direction") && !j.at("direction").is_null()) {
        const njson& d = j.at("direction");
        if (!d.is_array() || d.size() != 2 || !d[0].is_number() || !d[1].is_number()) {
            config_fail(path + ".direction", "expected [x, y]");
        }
        const double dx = d[0].get<double>();
        const double dy = d[1].get<double>();
        const double norm = std::hypot(dx, dy);
        if (!(norm > 0.0)) {
            config_fail(path + ".direction", "must be a nonzero vector");
        }
        t.direction_x = dx / norm;
        t.direction_y = dy / norm;
    }
    if (j.contains("start_offset") && !j.at("start_offset").is_null()) {
        const njson& s = j.at("start_offset");
        if (!s.is_array() || s.size() != 2 || !s[0].is_number_integer() ||
            !s[1].is_number_integer()) {
            config_fail(path + ".start_offset", "expected [dx, dy] integers");
        }
        t.start_dx = s[0].get<std::int32_t>();
        t.start_dy = s[1].get<std::int32_t>();
    }
    return t;
}

std::string fmt(const char* format, ...) {
    char buf[256];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    out << text;
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

struct TickRecord {
    std::uint64_t n = 0;
    std::int64_t s = 0;
    double q = 0.0;
    double optical = 0.0;
};

// One simulated measurement: pattern bits land in `bits`.
TickRecord synth_tick(const ExperimentConfig& cfg, const NoiseSpec& noise,
                      const SceneMask& mask, std::uint64_t n,
                      std::span<std::uint8_t> bits) {
    gen_pattern_into(cfg.pattern, n, bits);
    TickRecord rec;
    rec.n = n;
    rec.q = noise_sample(noise, cfg.timing, n);
    const BucketSample s = bucket_measure(bits, mask.mask, cfg.detector, rec.q,
                                          cfg.seed, n, &rec.optical);
    rec.s = static_cast<std::int64_t>(s.value);
    return rec;
}

void write_trace_csv(const std::filesystem::path& path,
                     std::span<const TickRecord> rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    out << "n,S,Q,optical\n";
    for (const TickRecord& r : rows) {
        out << r.n << ',' << r.s << ',' << format_double(r.q) << ','
            << format_double(r.optical) << '\n';
    }
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

void write_report(const std::filesystem::path& out_dir, const ojson& report) {
    write_text(out_dir / "report.json", report.dump(2) + "\n");
}

void prepare_dirs(const std::filesystem::path& out_dir, const ExperimentConfig& cfg) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir / "frames", ec);
    if (ec) {
        throw IoError("cannot create output directory: " + (out_dir / "frames").string());
    }
    if (cfg.output.write_traces) {
        std::filesystem::create_directories(out_dir / "traces");
    }
    if (cfg.output.dump_patterns) {
        std::filesystem::create_directories(out_dir / "patterns");
    }
}

void dump_patterns(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                   std::uint64_t count) {
    for (std::uint64_t n = 1; n <= count; ++n) {
        const Pattern p = gen_pattern(cfg.pattern, n);
        write_pattern_pgm(out_dir / "patterns" / fmt("pattern_%06llu.pgm",
                                                     static_cast<unsigned long long>(n)),
                          p);
    }
}

std::string checksum_hex(std::uint64_t sum) {
    return fmt("0x%016llx", static_cast<unsigned long long>(sum));
}

std::uint64_t checksum_samples(std::span<const std::int64_t> samples) {
    return fnv1a64(samples.data(), samples.size() * sizeof(std::int64_t));
}

ojson tool_json() {
    ojson j;
    j["name"] = std::string(kToolName);
    j["version"] = std::string(kToolVersion);
    return j;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

Trajectory default_moving_trajectory() {
    Trajectory t;
    t.speed_mm_s = 0.1;
    t.direction_x = -std::sqrt(0.5);
    t.direction_y = -std::sqrt(0.5);
    t.pixel_pitch_mm = 0.05;
    t.start_dx = 0;
    t.start_dy = 0;
    return t;
}

std::vector<NoiseSpec> default_noise_sweep() {
    // Amplitude 700 equals the mean clean bucket value of the stock
    // configuration (gain 8, letter T at 32x32, p = 0.5).
    std::vector<NoiseSpec> specs;
    NoiseSpec off;
    specs.push_back(off);
    for (const double f : {5.0, 50.0, 500.0, 10000.0}) {
        NoiseSpec s;
        s.waveform = NoiseWaveform::square;
        s.frequency_hz = f;
        s.amplitude = 700.0;
        specs.push_back(s);
    }
    return specs;
}

void ExperimentConfig::validate() const {
    pattern.validate();
    timing.validate();
    detector.validate();
    noise.validate();
    for (const NoiseSpec& n : noise_sweep) {
        n.validate();
    }
    if (trajectory) {
        trajectory->validate();
    }
    if (n_per_frame < 2) {
        throw ConfigError("config: n_per_frame must be >= 2");
    }
    if (n_noise < 2) {
        throw ConfigError("config: n_noise must be >= 2");
    }
    if (n_sweep.empty()) {
        throw ConfigError("config: n_sweep must not be empty");
    }
    for (const std::uint64_t n : n_sweep) {
        if (n < 2) {
            throw ConfigError("config: every n_sweep entry must be >= 2");
        }
    }
    if (frame_count < 1) {
        throw ConfigError("config: frame_count must be >= 1");
    }
    if (scene.source == SceneConfig::Source::file && scene.mask_file.empty()) {
        throw ConfigError("config: scene.mask_file required when scene.source is 'file'");
    }
}

ExperimentConfig ExperimentConfig::from_json(const njson& j,
                                             const std::uint64_t* seed_override) {
    check_keys(j, "config",
               {"pattern", "scene", "trajectory", "timing", "detector", "noise",
                "noise_sweep", "reconstruction", "n_per_frame", "n_sweep", "n_noise",
                "frame_count", "seed", "with_cgi", "output"});

    ExperimentConfig cfg;
    cfg.seed = get_u64(j, "seed", cfg.seed, "config");
    if (seed_override != nullptr) {
        cfg.seed = *seed_override;
    }

    if (j.contains("pattern") && !j.at("pattern").is_null()) {
        const njson& p = j.at("pattern");
        check_keys(p, "config.pattern", {"width", "height", "fill_probability", "seed"});
        cfg.pattern.width = get_u32(p, "width", cfg.pattern.width, "config.pattern");
        cfg.pattern.height = get_u32(p, "height", cfg.pattern.height, "config.pattern");
        cfg.pattern.fill_probability =
            get_double(p, "fill_probability", cfg.pattern.fill_probability, "config.pattern");
        cfg.pattern.seed = get_u64(p, "seed", cfg.seed, "config.pattern");
    } else {
        cfg.pattern.seed = cfg.seed;
    }

    if (j.contains("scene") && !j.at("scene").is_null()) {
        const njson& s = j.at("scene");
        check_keys(s, "config.scene", {"source", "mask_file"});
        const std::string source = get_string(s, "source", "letter_t", "config.scene");
        if (source == "letter_t") {
            cfg.scene.source = SceneConfig::Source::letter_t;
        } else if (source == "file") {
            cfg.scene.source = SceneConfig::Source::file;
        } else {
            config_fail("config.scene.source", "expected 'letter_t' or 'file'");
        }
        cfg.scene.mask_file = get_string(s, "mask_file", "", "config.scene");
    }

    if (j.contains("trajectory") && !j.at("trajectory").is_null()) {
        cfg.trajectory = parse_trajectory(j.at("trajectory"), "config.trajectory");
    }

    if (j.contains("timing") && !j.at("timing").is_null()) {
        const njson& t = j.at("timing");
        check_keys(t, "config.timing", {"dmd_rate_hz"});
        cfg.timing.dmd_rate_hz = get_double(t, "dmd_rate_hz", cfg.timing.dmd_rate_hz,
                                            "config.timing");
    }

    if (j.contains("detector") && !j.at("detector").is_null()) {
        const njson& d = j.at("detector");
        check_keys(d, "config.detector",
                   {"gain", "read_noise_sigma", "adc_bits", "shot_noise"});
        cfg.detector.gain = get_double(d, "gain", cfg.detector.gain, "config.detector");
        cfg.detector.read_noise_sigma = get_double(d, "read_noise_sigma",
                                                   cfg.detector.read_noise_sigma,
                                                   "config.detector");
        cfg.detector.adc_bits = get_u32(d, "adc_bits", cfg.detector.adc_bits,
                                        "config.detector");
        cfg.detector.shot_noise = get_bool(d, "shot_noise", cfg.detector.shot_noise,
                                           "config.detector");
    }

    if (j.contains("noise") && !j.at("noise").is_null()) {
        cfg.noise = parse_noise(j.at("noise"), "config.noise", cfg.seed);
    } else {
        cfg.noise.noise_seed = cfg.seed;
    }

    if (j.contains("noise_sweep") && !j.at("noise_sweep").is_null()) {
        const njson& arr = j.at("noise_sweep");
        if (!arr.is_array() || arr.empty()) {
            config_fail("config.noise_sweep", "expected a non-empty array");
        }
        cfg.noise_sweep.clear();
        for (std::size_t i = 0; i < arr.size(); ++i) {
            cfg.noise_sweep.push_back(
                parse_noise(arr[i], fmt("config.noise_sweep[%zu]", i), cfg.seed));
        }
    } else {
        cfg.noise_sweep = default_noise_sweep();
        for (NoiseSpec& n : cfg.noise_sweep) {
            n.noise_seed = cfg.seed;
        }
    }

    if (j.contains("reconstruction") && !j.at("reconstruction").is_null()) {
        const njson& r = j.at("reconstruction");
        check_keys(r, "config.reconstruction", {"mode", "fixed_bits"});
        const std::string mode = get_string(r, "mode", "exact", "config.reconstruction");
        if (mode == "exact") {
            cfg.mode = AccumulatorMode::exact();
        } else if (mode == "fixed") {
            const std::uint32_t bits =
                get_u32(r, "fixed_bits", 32, "config.reconstruction");
            try {
                cfg.mode = AccumulatorMode::fixed(bits);
            } catch (const std::invalid_argument& e) {
                config_fail("config.reconstruction.fixed_bits", e.what());
            }
        } else {
            config_fail("config.reconstruction.mode", "expected 'exact' or 'fixed'");
        }
    }

    cfg.n_per_frame = get_u64(j, "n_per_frame", cfg.n_per_frame, "config");
    if (j.contains("n_sweep") && !j.at("n_sweep").is_null()) {
        const njson& arr = j.at("n_sweep");
        if (!arr.is_array() || arr.empty()) {
            config_fail("config.n_sweep", "expected a non-empty array");
        }
        cfg.n_sweep.clear();
        for (const njson& v : arr) {
            if (!v.is_number_unsigned()) {
                config_fail("config.n_sweep", "entries must be unsigned integers");
            }
            cfg.n_sweep.push_back(v.get<std::uint64_t>());
        }
    }
    cfg.n_noise = get_u64(j, "n_noise", cfg.n_noise, "config");
    cfg.frame_count = get_u64(j, "frame_count", cfg.frame_count, "config");
    cfg.with_cgi = get_bool(j, "with_cgi", cfg.with_cgi, "config");

    if (j.contains("output") && !j.at("output").is_null()) {
        const njson& o = j.at("output");
        check_keys(o, "config.output", {"write_traces", "dump_patterns"});
        cfg.output.write_traces = get_bool(o, "write_traces", cfg.output.write_traces,
                                           "config.output");
        cfg.output.dump_patterns = get_bool(o, "dump_patterns", cfg.output.dump_patterns,
                                            "config.output");
    }

    cfg.validate();
    return cfg;
}

ExperimentConfig ExperimentConfig::from_json_text(std::string_view text,
                                                  const std::uint64_t* seed_override) {
    njson j = njson::object();
    if (!text.empty()) {
        try {
            j = njson::parse(text);
        } catch (const njson::parse_error& e) {
            throw ConfigError(std::string("config: invalid JSON: ") + e.what());
        }
    }
    return from_json(j, seed_override);
}

nlohmann::ordered_json ExperimentConfig::echo() const {
    ojson j;
    j["pattern"] = {{"width", pattern.width},
                    {"height", pattern.height},
                    {"fill_probability", pattern.fill_probability},
                    {"seed", pattern.seed}};
    j["scene"] = {{"source", scene.source == SceneConfig::Source::file ? "file" : "letter_t"},
                  {"mask_file", scene.mask_file.string()}};
    if (trajectory) {
        j["trajectory"] = {{"speed_mm_s", trajectory->speed_mm_s},
                           {"direction", {trajectory->direction_x, trajectory->direction_y}},
                           {"pixel_pitch_mm", trajectory->pixel_pitch_mm},
                           {"start_offset", {trajectory->start_dx, trajectory->start_dy}}};
    } else {
        j["trajectory"] = nullptr;
    }
    j["timing"] = {{"dmd_rate_hz", timing.dmd_rate_hz}};
    j["detector"] = {{"gain", detector.gain},
                     {"read_noise_sigma", detector.read_noise_sigma},
                     {"adc_bits", detector.adc_bits},
                     {"shot_noise", detector.shot_noise}};
    j["noise"] = noise_to_json(noise);
    ojson sweep = ojson::array();
    for (const NoiseSpec& n : noise_sweep) {
        sweep.push_back(noise_to_json(n));
    }
    j["noise_sweep"] = sweep;
    if (mode.is_exact()) {
        j["reconstruction"] = {{"mode", "exact"}};
    } else {
        j["reconstruction"] = {{"mode", "fixed"}, {"fixed_bits", mode.bits()}};
    }
    j["n_per_frame"] = n_per_frame;
    j["n_sweep"] = n_sweep;
    j["n_noise"] = n_noise;
    j["frame_count"] = frame_count;
    j["seed"] = seed;
    j["with_cgi"] = with_cgi;
    j["output"] = {{"write_traces", output.write_traces},
                   {"dump_patterns", output.dump_patterns}};
    return j;
}

double frame_rate(double dmd_rate_hz, std::uint64_t n_per_frame) {
    if (!(dmd_rate_hz > 0.0)) {
        throw std::invalid_argument("dmd rate must be positive");
    }
    if (n_per_frame < 1) {
        throw std::invalid_argument("measurements per frame must be >= 1");
    }
    return dmd_rate_hz / static_cast<double>(n_per_frame);
}

SceneMask resolve_scene(const ExperimentConfig& cfg) {
    SceneMask m;
    if (cfg.scene.source == SceneConfig::Source::file) {
        m = read_mask_pgm(cfg.scene.mask_file);
    } else {
        m = make_letter_t(cfg.pattern.width, cfg.pattern.height);
    }
    if (m.width != cfg.pattern.width || m.height != cfg.pattern.height) {
        throw ConfigError(fmt("config: scene mask is %ux%u but patterns are %ux%u",
                              m.width, m.height, cfg.pattern.width, cfg.pattern.height));
    }
    if (m.transmitting_count() == 0) {
        throw ConfigError("config: scene mask has no transmitting pixels");
    }
    return m;
}

nlohmann::ordered_json quality_to_json(const QualityReport& q) {
    ojson j;
    j["pearson_corr"] = q.pearson_corr;
    if (std::isinf(q.psnr_db)) {
        j["psnr_db"] = nullptr;
    } else {
        j["psnr_db"] = q.psnr_db;
    }
    j["mean_signal_region"] = q.mean_signal_region;
    j["mean_background_region"] = q.mean_background_region;
    if (q.cnr) {
        j["cnr"] = *q.cnr;
    } else {
        j["cnr"] = nullptr;
    }
    return j;
}

std::uint64_t fnv1a64(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001B3ull;
    }
    return h;
}

unsigned thread_cap() {
    if (const char* env = std::getenv("ISPI_THREADS"); env != nullptr && *env != '\0') {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end == nullptr || *end != '\0') {
            throw ConfigError("ISPI_THREADS must be an unsigned integer");
        }
        if (v > 0) {
            return static_cast<unsigned>(v);
        }
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? hc : 1;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers =
        std::min<std::size_t>(thread_cap(), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) {
                    return;
                }
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) {
                        error = std::current_exception();
                    }
                    return;
                }
            }
        });
    }
    for (std::thread& t : pool) {
        t.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

namespace {

struct StaticItem {
    std::uint64_t n = 0;
    ReconImage igi;
    std::optional<ReconImage> cgi;
    QualityReport q_igi;
    std::optional<QualityReport> q_cgi;
    std::uint64_t pairs = 0;
    bool saturated = false;
    std::vector<TickRecord> trace;
    double compute_seconds = 0.0;
};

} // namespace

RunOutcome run_static(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
    cfg.validate();
    if (cfg.trajectory) {
        throw ConfigError("config: run-static requires a config without a trajectory");
    }
    const SceneMask scene = resolve_scene(cfg);
    prepare_dirs(out_dir, cfg);

    const std::size_t pixels = cfg.pattern.pixel_count();
    std::vector<StaticItem> items(cfg.n_sweep.size());

    parallel_for(cfg.n_sweep.size(), [&](std::size_t i) {
        StaticItem& item = items[i];
        item.n = cfg.n_sweep[i];
        const auto t0 = std::chrono::steady_clock::now();

        IgiReconstructor igi(cfg.pattern.width, cfg.pattern.height, cfg.mode);
        std::vector<std::uint8_t> bits(pixels);
        std::vector<std::int64_t> samples;
        std::vector<std::uint8_t> packed;
        if (cfg.with_cgi) {
            samples.reserve(item.n);
            packed.reserve(item.n * pixels);
        }
        item.trace.reserve(item.n);

        for (std::uint64_t n = 1; n <= item.n; ++n) {
            const TickRecord rec = synth_tick(cfg, cfg.noise, scene, n, bits);
            igi.step(rec.s, bits);
            if (cfg.with_cgi) {
                samples.push_back(rec.s);
                packed.insert(packed.end(), bits.begin(), bits.end());
            }
            item.trace.push_back(rec);
        }
        item.igi = igi.finalize();
        item.pairs = igi.pairs_count();
        item.saturated = igi.saturated();
        if (cfg.with_cgi) {
            item.cgi = cgi_reconstruct(cfg.pattern.width, cfg.pattern.height, samples,
                                       packed);
        }
        item.compute_seconds = seconds_since(t0);

        item.q_igi = quality_report(item.igi, scene);
        if (item.cgi) {
            item.q_cgi = quality_report(*item.cgi, scene);
        }
    });

    ojson runs = ojson::array();
    ojson timing_runs = ojson::array();
    for (const StaticItem& item : items) {
        const std::string stem = fmt("frame_N%04llu",
                                     static_cast<unsigned long long>(item.n));
        const std::string pgm = "frames/" + stem + ".pgm";
        const std::string csv = "frames/" + stem + ".csv";
        write_pgm(out_dir / pgm, item.igi.width, item.igi.height,
                  normalize_8bit(item.igi.values));
        write_image_csv(out_dir / csv, item.igi);

        ojson files;
        files["igi_pgm"] = pgm;
        files["igi_csv"] = csv;
        if (item.cgi) {
            const std::string cgi_stem = fmt("cgi_N%04llu",
                                             static_cast<unsigned long long>(item.n));
            files["cgi_pgm"] = "frames/" + cgi_stem + ".pgm";
            files["cgi_csv"] = "frames/" + cgi_stem + ".csv";
            write_pgm(out_dir / "frames" / (cgi_stem + ".pgm"), item.cgi->width,
                      item.cgi->height, normalize_8bit(item.cgi->values));
            write_image_csv(out_dir / "frames" / (cgi_stem + ".csv"), *item.cgi);
        }
        if (cfg.output.write_traces) {
            const std::string trace = "traces/trace_N" +
                                      fmt("%04llu", static_cast<unsigned long long>(item.n)) +
                                      ".csv";
            write_trace_csv(out_dir / trace, item.trace);
            files["trace"] = trace;
        }

        ojson run;
        run["n_measurements"] = item.n;
        run["frame_rate_fps"] = frame_rate(cfg.timing.dmd_rate_hz, item.n);
        run["imaging_time_s"] =
            static_cast<double>(item.n) / cfg.timing.dmd_rate_hz;
        run["pairs_count"] = item.pairs;
        run["saturated"] = item.saturated;
        run["igi"] = quality_to_json(item.q_igi);
        run["cgi"] = item.q_cgi ? quality_to_json(*item.q_cgi) : ojson(nullptr);
        run["files"] = files;
        runs.push_back(run);

        ojson tr;
        tr["n_measurements"] = item.n;
        tr["compute_seconds"] = item.compute_seconds;
        timing_runs.push_back(tr);
    }

    if (cfg.output.dump_patterns) {
        dump_patterns(cfg, out_dir,
                      *std::max_element(cfg.n_sweep.begin(), cfg.n_sweep.end()));
    }

    RunOutcome out;
    out.report["tool"] = tool_json();
    out.report["experiment"] = "static";
    out.report["config"] = cfg.echo();
    out.report["scene"] = {{"width", scene.width},
                           {"height", scene.height},
                           {"transmitting_pixels", scene.transmitting_count()}};
    out.report["runs"] = runs;
    write_report(out_dir, out.report);

    out.timing["runs"] = timing_runs;
    return out;
}

RunOutcome run_moving(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
    cfg.validate();
    const Trajectory traj = cfg.trajectory.value_or(default_moving_trajectory());
    const SceneMask base = resolve_scene(cfg);
    prepare_dirs(out_dir, cfg);

    const std::uint64_t n = cfg.n_per_frame;
    const std::uint64_t frames = cfg.frame_count;
    const std::size_t pixels = cfg.pattern.pixel_count();

    // Ground truth, sampled once per frame at the frame start time.
    std::vector<double> start_times(frames);
    std::vector<PixelShift> shifts(frames);
    std::vector<SceneMask> masks(frames);
    for (std::uint64_t k = 0; k < frames; ++k) {
        start_times[k] = static_cast<double>(k) * static_cast<double>(n) /
                         cfg.timing.dmd_rate_hz;
        shifts[k] = commanded_shift(traj, start_times[k]);
        masks[k] = translate(base, shifts[k].dx, shifts[k].dy);
    }

    struct FrameItem {
        ReconImage img;
        std::optional<QualityReport> quality;
        std::uint64_t pairs = 0;
        bool saturated = false;
        std::vector<TickRecord> trace;
        double compute_seconds = 0.0;
    };
    std::vector<FrameItem> items(frames);

    // Frames are independent because every measurement is regenerable from
    // its ordinal; frame k re-synthesizes the boundary measurement of frame
    // k-1 to initialize its difference chain.
    parallel_for(frames, [&](std::size_t k) {
        FrameItem& item = items[k];
        const auto t0 = std::chrono::steady_clock::now();
        IgiReconstructor igi(cfg.pattern.width, cfg.pattern.height, cfg.mode);
        std::vector<std::uint8_t> bits(pixels);

        const std::uint64_t first = static_cast<std::uint64_t>(k) * n + 1;
        if (k > 0) {
            const TickRecord boundary =
                synth_tick(cfg, cfg.noise, masks[k - 1], first - 1, bits);
            igi.step(boundary.s, bits);
            igi.begin_frame();
        }
        item.trace.reserve(n);
        for (std::uint64_t m = first; m < first + n; ++m) {
            const TickRecord rec = synth_tick(cfg, cfg.noise, masks[k], m, bits);
            igi.step(rec.s, bits);
            item.trace.push_back(rec);
        }
        item.img = igi.finalize();
        item.pairs = igi.pairs_count();
        item.saturated = igi.saturated();
        item.compute_seconds = seconds_since(t0);
        // A frame whose object left the field entirely can come out flat;
        // quality is then undefined and reported as null.
        if (masks[k].transmitting_count() > 0 &&
            masks[k].transmitting_count() < masks[k].mask.size()) {
            try {
                item.quality = quality_report(item.img, masks[k]);
            } catch (const std::invalid_argument&) {
            }
        }
    });

    const double fps = frame_rate(cfg.timing.dmd_rate_hz, n);
    ojson frame_entries = ojson::array();
    ojson manifest_frames = ojson::array();
    ojson timing_frames = ojson::array();
    std::vector<TickRecord> full_trace;
    if (cfg.output.write_traces) {
        full_trace.reserve(frames * n);
    }
    for (std::uint64_t k = 0; k < frames; ++k) {
        const FrameItem& item = items[k];
        const std::string file = fmt("frames/frame_%06llu.pgm",
                                     static_cast<unsigned long long>(k + 1));
        write_pgm(out_dir / file, item.img.width, item.img.height,
                  normalize_8bit(item.img.values));
        write_image_csv(out_dir / fmt("frames/frame_%06llu.csv",
                                      static_cast<unsigned long long>(k + 1)),
                        item.img);
        if (cfg.output.write_traces) {
            full_trace.insert(full_trace.end(), item.trace.begin(), item.trace.end());
        }

        ojson f;
        f["frame"] = k + 1;
        f["start_time_s"] = start_times[k];
        f["offset"] = {shifts[k].dx, shifts[k].dy};
        f["pairs_count"] = item.pairs;
        f["saturated"] = item.saturated;
        f["quality"] = item.quality ? quality_to_json(*item.quality) : ojson(nullptr);
        f["file"] = file;
        frame_entries.push_back(f);
        manifest_frames.push_back(file);

        ojson tf;
        tf["frame"] = k + 1;
        tf["compute_seconds"] = item.compute_seconds;
        timing_frames.push_back(tf);
    }
    if (cfg.output.write_traces) {
        write_trace_csv(out_dir / "traces/trace.csv", full_trace);
    }
    if (cfg.output.dump_patterns) {
        dump_patterns(cfg, out_dir, frames * n);
    }

    RunOutcome out;
    out.report["tool"] = tool_json();
    out.report["experiment"] = "moving";
    ExperimentConfig resolved = cfg;
    resolved.trajectory = traj;
    out.report["config"] = resolved.echo();
    out.report["frame_rate_fps"] = fps;
    out.report["imaging_time_s"] = static_cast<double>(n) / cfg.timing.dmd_rate_hz;
    out.report["frames"] = frame_entries;
    out.report["manifest"] = {{"fps", fps}, {"frames", manifest_frames}};
    write_report(out_dir, out.report);

    out.timing["frames"] = timing_frames;
    return out;
}

namespace {

std::string noise_label(std::size_t index, const NoiseSpec& spec) {
    std::string label = fmt("s%02zu_%s", index, waveform_name(spec.waveform));
    if (spec.waveform != NoiseWaveform::off) {
        std::string freq = format_double(spec.frequency_hz);
        for (char& c : freq) {
            if (c == '.') {
                c = 'p';
            }
        }
        label += "_" + freq + "hz";
    }
    return label;
}

} // namespace

RunOutcome run_noise_sweep(const ExperimentConfig& cfg,
                           const std::filesystem::path& out_dir) {
    cfg.validate();
    if (cfg.noise_sweep.empty()) {
        throw ConfigError("config: noise_sweep must not be empty");
    }
    const SceneMask scene = resolve_scene(cfg);
    prepare_dirs(out_dir, cfg);

    const std::uint64_t n = cfg.n_noise;
    const std::size_t pixels = cfg.pattern.pixel_count();

    struct SweepItem {
        ReconImage igi;
        ReconImage cgi;
        QualityReport q_igi;
        QualityReport q_cgi;
        double ratio = 0.0;
        std::uint64_t checksum_igi = 0;
        std::uint64_t checksum_cgi = 0;
        std::uint64_t pairs = 0;
        bool saturated = false;
        std::vector<TickRecord> trace;
        double compute_seconds = 0.0;
    };
    std::vector<SweepItem> items(cfg.noise_sweep.size());

    parallel_for(cfg.noise_sweep.size(), [&](std::size_t i) {
        SweepItem& item = items[i];
        const NoiseSpec& spec = cfg.noise_sweep[i];
        const auto t0 = std::chrono::steady_clock::now();

        std::vector<std::uint8_t> bits(pixels);
        std::vector<std::int64_t> samples;
        samples.reserve(n);
        std::vector<std::uint8_t> packed;
        packed.reserve(n * pixels);
        std::vector<double> s_series(n);
        std::vector<double> q_series(n);
        item.trace.reserve(n);

        for (std::uint64_t m = 1; m <= n; ++m) {
            const TickRecord rec = synth_tick(cfg, spec, scene, m, bits);
            samples.push_back(rec.s);
            packed.insert(packed.end(), bits.begin(), bits.end());
            s_series[m - 1] = static_cast<double>(rec.s);
            q_series[m - 1] = rec.q;
            item.trace.push_back(rec);
        }

        // Both reconstructions consume the literal same sample array; the
        // checksums recorded per consumer prove it.
        item.checksum_igi = checksum_samples(samples);
        IgiReconstructor igi(cfg.pattern.width, cfg.pattern.height, cfg.mode);
        for (std::uint64_t m = 0; m < n; ++m) {
            igi.step(samples[m],
                     std::span<const std::uint8_t>(packed.data() + m * pixels, pixels));
        }
        item.igi = igi.finalize();
        item.pairs = igi.pairs_count();
        item.saturated = igi.saturated();

        item.checksum_cgi = checksum_samples(samples);
        item.cgi = cgi_reconstruct(cfg.pattern.width, cfg.pattern.height, samples, packed);

        if (item.checksum_igi != item.checksum_cgi) {
            throw StateError("noise sweep fairness violated: sample streams differ");
        }

        item.ratio = slow_noise_ratio(s_series, q_series);
        item.compute_seconds = seconds_since(t0);
        item.q_igi = quality_report(item.igi, scene);
        item.q_cgi = quality_report(item.cgi, scene);
    });

    ojson entries = ojson::array();
    ojson timing_entries = ojson::array();
    for (std::size_t i = 0; i < items.size(); ++i) {
        const SweepItem& item = items[i];
        const std::string label = noise_label(i, cfg.noise_sweep[i]);

        ojson files;
        for (const char* kind : {"igi", "cgi"}) {
            const ReconImage& img = kind[0] == 'i' ? item.igi : item.cgi;
            const std::string pgm = "frames/" + std::string(kind) + "_" + label + ".pgm";
            const std::string csv = "frames/" + std::string(kind) + "_" + label + ".csv";
            write_pgm(out_dir / pgm, img.width, img.height, normalize_8bit(img.values));
            write_image_csv(out_dir / csv, img);
            files[std::string(kind) + "_pgm"] = pgm;
            files[std::string(kind) + "_csv"] = csv;
        }
        if (cfg.output.write_traces) {
            const std::string trace = "traces/" + label + ".csv";
            write_trace_csv(out_dir / trace, item.trace);
            files["trace"] = trace;
        }

        ojson e;
        e["label"] = label;
        e["noise"] = noise_to_json(cfg.noise_sweep[i]);
        e["n_measurements"] = n;
        e["slow_noise_ratio"] = item.ratio;
        e["stream_checksum"] = checksum_hex(item.checksum_igi);
        e["pairs_count"] = item.pairs;
        e["saturated"] = item.saturated;
        e["igi"] = quality_to_json(item.q_igi);
        e["cgi"] = quality_to_json(item.q_cgi);
        e["files"] = files;
        entries.push_back(e);

        ojson te;
        te["label"] = label;
        te["compute_seconds"] = item.compute_seconds;
        timing_entries.push_back(te);
    }

    if (cfg.output.dump_patterns) {
        dump_patterns(cfg, out_dir, n);
    }

    RunOutcome out;
    out.report["tool"] = tool_json();
    out.report["experiment"] = "noise-sweep";
    out.report["config"] = cfg.echo();
    out.report["scene"] = {{"width", scene.width},
                           {"height", scene.height},
                           {"transmitting_pixels", scene.transmitting_count()}};
    out.report["sweep"] = entries;
    write_report(out_dir, out.report);

    out.timing["sweep"] = timing_entries;
    return out;
}

namespace {

// Cycles pregenerated patterns through a reconstructor and times the steps.
double time_steps(std::uint32_t width, std::uint32_t height, AccumulatorMode mode,
                  const std::vector<std::vector<std::uint8_t>>& pool,
                  const std::vector<std::int64_t>& samples, std::uint64_t steps,
                  int repetitions) {
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < repetitions; ++r) {
        IgiReconstructor igi(width, height, mode);
        const auto t0 = std::chrono::steady_clock::now();
        for (std::uint64_t i = 0; i < steps; ++i) {
            const std::size_t slot = i % pool.size();
            igi.step(samples[slot], pool[slot]);
        }
        const double elapsed = seconds_since(t0);
        if (igi.pairs_count() != steps - 1) {
            throw StateError("bench reconstructor consumed an unexpected step count");
        }
        best = std::min(best, elapsed);
    }
    return best;
}

struct BenchSetup {
    std::vector<std::vector<std::uint8_t>> pool;
    std::vector<std::int64_t> samples;
};

BenchSetup make_bench_setup(const PatternSpec& spec) {
    constexpr std::size_t kPool = 257;
    BenchSetup s;
    s.pool.reserve(kPool);
    s.samples.reserve(kPool);
    const std::uint64_t key = rng::derive_key(spec.seed, 0xBE7C);
    for (std::size_t i = 0; i < kPool; ++i) {
        s.pool.push_back(gen_pattern(spec, i + 1).bits);
        s.samples.push_back(static_cast<std::int64_t>(rng::at(key, i) & 0xFFF));
    }
    return s;
}

} // namespace

nlohmann::ordered_json bench(const ExperimentConfig& cfg,
                             const std::filesystem::path* out_dir) {
    cfg.validate();
    const std::uint32_t w = cfg.pattern.width;
    const std::uint32_t h = cfg.pattern.height;
    const std::size_t pixels = cfg.pattern.pixel_count();

    const BenchSetup base = make_bench_setup(cfg.pattern);
    // warmup
    time_steps(w, h, cfg.mode, base.pool, base.samples, 2000, 1);

    constexpr std::uint64_t kSmall = 10000;
    constexpr std::uint64_t kLarge = 100000;
    const double t_small = time_steps(w, h, cfg.mode, base.pool, base.samples, kSmall, 5);
    const double t_large = time_steps(w, h, cfg.mode, base.pool, base.samples, kLarge, 3);
    const double per_small = t_small / static_cast<double>(kSmall);
    const double per_large = t_large / static_cast<double>(kLarge);
    const double flat_ratio = std::max(per_small, per_large) /
                              std::min(per_small, per_large);
    const double steps_per_second = 1.0 / per_large;

    PatternSpec doubled = cfg.pattern;
    doubled.height = 2 * h;
    const BenchSetup big = make_bench_setup(doubled);
    time_steps(w, doubled.height, cfg.mode, big.pool, big.samples, 2000, 1);
    const double t_double = time_steps(w, doubled.height, cfg.mode, big.pool,
                                       big.samples, kLarge, 3);
    const double per_double = t_double / static_cast<double>(kLarge);
    const double scaling = per_double / per_large;

    const bool flat_ok = flat_ratio < 1.2;
    const bool scaling_ok = scaling >= 1.0 && scaling <= 3.0;

    ojson report;
    report["tool"] = tool_json();
    report["experiment"] = "bench";
    report["pixels"] = pixels;
    report["mode"] = cfg.mode.is_exact() ? "exact" : fmt("fixed(%u)", cfg.mode.bits());
    report["steps_small"] = kSmall;
    report["steps_large"] = kLarge;
    report["per_step_ns_small"] = per_small * 1e9;
    report["per_step_ns_large"] = per_large * 1e9;
    report["per_step_flat_ratio"] = flat_ratio;
    report["steps_per_second"] = steps_per_second;
    report["double_pixels"] = {{"pixels", pixels * 2},
                               {"per_step_ns", per_double * 1e9},
                               {"scaling_ratio", scaling}};
    report["checks"] = {{"per_step_cost_flat", flat_ok}, {"pixel_scaling", scaling_ok}};

    if (out_dir != nullptr) {
        std::filesystem::create_directories(*out_dir);
        write_text(*out_dir / "bench_report.json", report.dump(2) + "\n");
    }

    if (!flat_ok) {
        throw StateError(fmt("bench: per-step cost not flat in stream length "
                             "(%.1f ns vs %.1f ns per step)",
                             per_small * 1e9, per_large * 1e9));
    }
    if (!scaling_ok) {
        throw StateError(fmt("bench: pixel-count scaling ratio %.2f outside [1, 3]",
                             scaling));
    }
    return report;
}

} // namespace ispi
