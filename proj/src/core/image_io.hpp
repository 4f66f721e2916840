#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "core/pattern.hpp"
#include "core/reconstruct.hpp"
#include "core/scene.hpp"

namespace ispi {

struct PgmImage {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::uint32_t maxval = 255;
    std::vector<std::uint8_t> pixels;
};

/// Binary PGM (P5, maxval 255).
void write_pgm(const std::filesystem::path& path, std::uint32_t width,
               std::uint32_t height, std::span<const std::uint8_t> pixels);

/// Reads a binary PGM with maxval <= 255.
PgmImage read_pgm(const std::filesystem::path& path);

/// Mask <-> PGM: 0 maps to 0 (opaque), 1 maps to 255 (transmit). On import,
/// pixels at or above half of maxval transmit.
void write_mask_pgm(const std::filesystem::path& path, const SceneMask& mask);
SceneMask read_mask_pgm(const std::filesystem::path& path);

/// Pattern debug dump: bit 0 -> 0, bit 1 -> 255.
void write_pattern_pgm(const std::filesystem::path& path, const Pattern& pattern);

/// Raw signed image values, one CSV row per image row.
void write_image_csv(const std::filesystem::path& path, const ReconImage& img);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

} // namespace ispi
