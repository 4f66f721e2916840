#include "core/image_io.hpp"

#include <cctype>
#include <charconv>
#include <fstream>

#include "core/errors.hpp"

namespace ispi {

namespace {

// Reads one PNM header token, skipping whitespace and '#' comment lines.
std::string next_token(std::istream& in) {
    std::string tok;
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') {
                c = in.get();
            }
        } else if (std::isspace(c)) {
            c = in.get();
        } else {
            break;
        }
    }
    while (c != EOF && !std::isspace(c)) {
        tok.push_back(static_cast<char>(c));
        c = in.get();
    }
    return tok;
}

std::uint32_t parse_u32(const std::string& tok, const char* what) {
    std::uint32_t v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw IoError(std::string("malformed PGM header field: ") + what);
    }
    return v;
}

} // namespace

void write_pgm(const std::filesystem::path& path, std::uint32_t width,
               std::uint32_t height, std::span<const std::uint8_t> pixels) {
    if (pixels.size() != static_cast<std::size_t>(width) * height) {
        throw DimensionMismatch("pixel buffer does not match PGM dimensions");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    out << "P5\n" << width << " " << height << "\n255\n";
    out.write(reinterpret_cast<const char*>(pixels.data()),
              static_cast<std::streamsize>(pixels.size()));
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

PgmImage read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open for reading: " + path.string());
    }
    if (next_token(in) != "P5") {
        throw IoError("not a binary PGM (P5): " + path.string());
    }
    PgmImage img;
    img.width = parse_u32(next_token(in), "width");
    img.height = parse_u32(next_token(in), "height");
    img.maxval = parse_u32(next_token(in), "maxval");
    if (img.width == 0 || img.height == 0) {
        throw IoError("PGM has zero dimension: " + path.string());
    }
    if (img.maxval == 0 || img.maxval > 255) {
        throw IoError("unsupported PGM maxval (expected 1..255): " + path.string());
    }
    const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
    img.pixels.resize(n);
    in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(n));
    if (in.gcount() != static_cast<std::streamsize>(n)) {
        throw IoError("truncated PGM payload: " + path.string());
    }
    return img;
}

void write_mask_pgm(const std::filesystem::path& path, const SceneMask& mask) {
    std::vector<std::uint8_t> gray(mask.mask.size());
    for (std::size_t i = 0; i < gray.size(); ++i) {
        gray[i] = mask.mask[i] ? 255 : 0;
    }
    write_pgm(path, mask.width, mask.height, gray);
}

SceneMask read_mask_pgm(const std::filesystem::path& path) {
    const PgmImage img = read_pgm(path);
    SceneMask m;
    m.width = img.width;
    m.height = img.height;
    m.mask.resize(img.pixels.size());
    const std::uint32_t threshold = (img.maxval + 1) / 2;
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        m.mask[i] = img.pixels[i] >= threshold ? 1 : 0;
    }
    return m;
}

void write_pattern_pgm(const std::filesystem::path& path, const Pattern& pattern) {
    std::vector<std::uint8_t> gray(pattern.bits.size());
    for (std::size_t i = 0; i < gray.size(); ++i) {
        gray[i] = pattern.bits[i] ? 255 : 0;
    }
    write_pgm(path, pattern.width, pattern.height, gray);
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) {
        throw IoError("double formatting failed");
    }
    return std::string(buf, ptr);
}

void write_image_csv(const std::filesystem::path& path, const ReconImage& img) {
    if (img.values.size() != static_cast<std::size_t>(img.width) * img.height) {
        throw DimensionMismatch("image buffer does not match its dimensions");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    for (std::uint32_t r = 0; r < img.height; ++r) {
        for (std::uint32_t c = 0; c < img.width; ++c) {
            if (c) {
                out << ',';
            }
            out << format_double(img.values[static_cast<std::size_t>(r) * img.width + c]);
        }
        out << '\n';
    }
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

} // namespace ispi
