// ispi command-line front end. Talks to the shared library exclusively
// through the C API; artifact writing and determinism live in the library.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "ispi/ispi.h"

namespace {

int exit_code_for(ispi_status status) {
    switch (status) {
    case ISPI_OK:
        return 0;
    case ISPI_ERROR_CONFIG:
    case ISPI_ERROR_INVALID_ARGUMENT:
        return 2;
    case ISPI_ERROR_IO:
        return 3;
    default:
        return 1;
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read config file: " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

double number_or(const nlohmann::json& j, const char* key, double fallback) {
    if (j.contains(key) && j.at(key).is_number()) {
        return j.at(key).get<double>();
    }
    return fallback;
}

void print_quality(const char* tag, const nlohmann::json& q) {
    if (!q.is_object()) {
        return;
    }
    std::printf("    %s corr=%.4f", tag, number_or(q, "pearson_corr", 0.0));
    if (q.contains("psnr_db") && q.at("psnr_db").is_number()) {
        std::printf(" psnr=%.2f dB", q.at("psnr_db").get<double>());
    }
    std::printf("\n");
}

void summarize(const std::string& command, const nlohmann::json& report) {
    if (command == "run-static") {
        for (const auto& run : report.at("runs")) {
            std::printf("  N=%5llu  frame_rate=%g fps  imaging_time=%g s%s\n",
                        static_cast<unsigned long long>(
                            run.at("n_measurements").get<std::uint64_t>()),
                        run.at("frame_rate_fps").get<double>(),
                        run.at("imaging_time_s").get<double>(),
                        run.at("saturated").get<bool>() ? "  [saturated]" : "");
            print_quality("igi", run.at("igi"));
            if (run.contains("cgi")) {
                print_quality("cgi", run.at("cgi"));
            }
        }
    } else if (command == "run-moving") {
        const auto& frames = report.at("frames");
        double sum = 0.0;
        std::size_t scored = 0;
        for (const auto& f : frames) {
            if (f.at("quality").is_object()) {
                sum += number_or(f.at("quality"), "pearson_corr", 0.0);
                ++scored;
            }
        }
        std::printf("  %zu frames at %g fps", frames.size(),
                    report.at("frame_rate_fps").get<double>());
        if (scored > 0) {
            std::printf(", mean corr %.4f over %zu scored frames",
                        sum / static_cast<double>(scored), scored);
        }
        std::printf("\n");
    } else if (command == "run-noise-sweep") {
        for (const auto& e : report.at("sweep")) {
            std::printf("  %-22s slow_noise_ratio=%-10.5g",
                        e.at("label").get<std::string>().c_str(),
                        e.at("slow_noise_ratio").get<double>());
            std::printf(" igi corr=%.4f cgi corr=%.4f\n",
                        number_or(e.at("igi"), "pearson_corr", 0.0),
                        number_or(e.at("cgi"), "pearson_corr", 0.0));
        }
    } else if (command == "bench") {
        std::printf("  %.0f steps/s at %llu pixels (%.1f ns/step)\n",
                    report.at("steps_per_second").get<double>(),
                    static_cast<unsigned long long>(report.at("pixels").get<std::uint64_t>()),
                    report.at("per_step_ns_large").get<double>());
        std::printf("  per-step flat ratio %.3f, pixel scaling %.2fx\n",
                    report.at("per_step_flat_ratio").get<double>(),
                    report.at("double_pixels").at("scaling_ratio").get<double>());
    }

    if (report.contains("timing")) {
        const auto& t = report.at("timing");
        double total = 0.0;
        for (const char* key : {"runs", "frames", "sweep"}) {
            if (t.contains(key)) {
                for (const auto& entry : t.at(key)) {
                    total += number_or(entry, "compute_seconds", 0.0);
                }
            }
        }
        std::printf("  compute time %.3f s total\n", total);
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"instant single-pixel imaging simulator"};
    app.set_version_flag("--version", std::string(ispi_version()));
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;

    const auto add_common = [&](CLI::App* sub, bool out_required) {
        sub->add_option("--config", config_path, "experiment config (JSON)")
            ->check(CLI::ExistingFile);
        auto* out = sub->add_option("--out", out_dir, "output directory");
        if (out_required) {
            out->required();
        }
        sub->add_option("--seed", seed, "override the master seed");
    };

    CLI::App* cmd_static = app.add_subcommand("run-static", "static N-sweep experiment");
    add_common(cmd_static, true);
    CLI::App* cmd_moving = app.add_subcommand("run-moving", "moving-object video");
    add_common(cmd_moving, true);
    CLI::App* cmd_noise = app.add_subcommand("run-noise-sweep",
                                             "background-noise comparison of the "
                                             "streaming and batch reconstructions");
    add_common(cmd_noise, true);
    CLI::App* cmd_bench = app.add_subcommand("bench", "streaming-step microbenchmark");
    add_common(cmd_bench, false);

    CLI11_PARSE(app, argc, argv);

    std::string config_text;
    if (!config_path.empty()) {
        try {
            config_text = read_file(config_path);
        } catch (const std::exception& e) {
            std::fprintf(stderr, "error: %s\n", e.what());
            return 3;
        }
    }

    const std::uint64_t seed_value = seed.value_or(0);
    const std::uint64_t* seed_ptr = seed.has_value() ? &seed_value : nullptr;

    const std::string command = app.get_subcommands().front()->get_name();
    char* report_text = nullptr;
    ispi_status status = ISPI_OK;
    if (command == "run-static") {
        status = ispi_run_static(config_text.c_str(), out_dir.c_str(), seed_ptr,
                                 &report_text);
    } else if (command == "run-moving") {
        status = ispi_run_moving(config_text.c_str(), out_dir.c_str(), seed_ptr,
                                 &report_text);
    } else if (command == "run-noise-sweep") {
        status = ispi_run_noise_sweep(config_text.c_str(), out_dir.c_str(), seed_ptr,
                                      &report_text);
    } else if (command == "bench") {
        status = ispi_bench(config_text.c_str(), out_dir.empty() ? nullptr : out_dir.c_str(),
                            &report_text);
    }

    if (status != ISPI_OK) {
        std::fprintf(stderr, "error: %s (%s)\n", ispi_last_error(),
                     ispi_status_name(status));
        ispi_string_free(report_text);
        return exit_code_for(status);
    }

    std::printf("%s: ok\n", command.c_str());
    if (report_text != nullptr) {
        try {
            summarize(command, nlohmann::json::parse(report_text));
        } catch (const std::exception&) {
            // summary is best-effort; the report on disk is authoritative
        }
        ispi_string_free(report_text);
    }
    if (!out_dir.empty()) {
        std::printf("artifacts in %s\n", out_dir.c_str());
    }
    return 0;
}
