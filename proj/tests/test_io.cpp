#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "core/errors.hpp"
#include "core/image_io.hpp"

using namespace ispi;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    const fs::path dir = fs::temp_directory_path() / "ispi_io_tests";
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_SUITE("image_io") {

TEST_CASE("pgm bytes are exactly P5 with maxval 255") {
    const fs::path path = temp_dir() / "tiny.pgm";
    const std::vector<std::uint8_t> pixels{0, 128, 255, 7, 9, 11};
    write_pgm(path, 3, 2, pixels);
    const std::string bytes = slurp(path);
    const std::string header = "P5\n3 2\n255\n";
    REQUIRE(bytes.size() == header.size() + 6);
    CHECK(bytes.substr(0, header.size()) == header);
    CHECK(static_cast<std::uint8_t>(bytes[header.size() + 1]) == 128);

    const PgmImage img = read_pgm(path);
    CHECK(img.width == 3);
    CHECK(img.height == 2);
    CHECK(img.maxval == 255);
    CHECK(img.pixels == pixels);
}

TEST_CASE("pgm reader skips comment lines") {
    const fs::path path = temp_dir() / "comment.pgm";
    {
        std::ofstream out(path, std::ios::binary);
        out << "P5\n# a comment\n2 1\n# another\n255\n";
        out.put(static_cast<char>(1));
        out.put(static_cast<char>(2));
    }
    const PgmImage img = read_pgm(path);
    CHECK(img.width == 2);
    CHECK(img.pixels == std::vector<std::uint8_t>{1, 2});
}

TEST_CASE("mask round-trips through pgm") {
    SceneMask m;
    m.width = 4;
    m.height = 2;
    m.mask = {1, 0, 0, 1, 0, 1, 1, 0};
    const fs::path path = temp_dir() / "mask.pgm";
    write_mask_pgm(path, m);
    const SceneMask back = read_mask_pgm(path);
    CHECK(back.width == m.width);
    CHECK(back.height == m.height);
    CHECK(back.mask == m.mask);
}

TEST_CASE("mask import thresholds at half of maxval") {
    const fs::path path = temp_dir() / "gray.pgm";
    {
        std::ofstream out(path, std::ios::binary);
        out << "P5\n4 1\n255\n";
        for (const int v : {0, 127, 128, 255}) {
            out.put(static_cast<char>(v));
        }
    }
    const SceneMask m = read_mask_pgm(path);
    CHECK(m.mask == std::vector<std::uint8_t>{0, 0, 1, 1});
}

TEST_CASE("image csv is one row per image row") {
    ReconImage img;
    img.width = 2;
    img.height = 2;
    img.values = {0.5, -1.0, 2.0, 0.0};
    const fs::path path = temp_dir() / "img.csv";
    write_image_csv(path, img);
    CHECK(slurp(path) == "0.5,-1\n2,0\n");
}

TEST_CASE("malformed inputs raise IoError") {
    const fs::path dir = temp_dir();
    CHECK_THROWS_AS(read_pgm(dir / "does_not_exist.pgm"), IoError);

    const fs::path p6 = dir / "p6.pgm";
    {
        std::ofstream out(p6, std::ios::binary);
        out << "P6\n1 1\n255\n";
        out.put(static_cast<char>(0));
    }
    CHECK_THROWS_AS(read_pgm(p6), IoError);

    const fs::path truncated = dir / "short.pgm";
    {
        std::ofstream out(truncated, std::ios::binary);
        out << "P5\n4 4\n255\n";
        out.put(static_cast<char>(0));
    }
    CHECK_THROWS_AS(read_pgm(truncated), IoError);

    const fs::path wide = dir / "wide.pgm";
    {
        std::ofstream out(wide, std::ios::binary);
        out << "P5\n1 1\n65535\n";
        out.put(static_cast<char>(0));
        out.put(static_cast<char>(0));
    }
    CHECK_THROWS_AS(read_pgm(wide), IoError);
}

TEST_CASE("format_double uses shortest round-trip forms") {
    CHECK(format_double(0.04) == "0.04");
    CHECK(format_double(25.0) == "25");
    CHECK(format_double(-1.0 / 6.0) == "-0.16666666666666666");
}

} // TEST_SUITE
