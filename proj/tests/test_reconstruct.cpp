#include "doctest.h"

#include <stdexcept>
#include <vector>

#include "core/errors.hpp"
#include "core/forward.hpp"
#include "core/pattern.hpp"
#include "core/reconstruct.hpp"
#include "core/rng.hpp"
#include "oracles.hpp"

using namespace ispi;

namespace {

void feed(IgiReconstructor& igi, std::int64_t s, std::initializer_list<std::uint8_t> bits) {
    const std::vector<std::uint8_t> v(bits);
    igi.step(s, v);
}

} // namespace

TEST_SUITE("reconstruct") {

TEST_CASE("construction") {
    const IgiReconstructor a(32, 32);
    CHECK(a.pairs_count() == 0);
    CHECK(a.accumulator().size() == 1024);
    for (const auto v : a.accumulator()) {
        CHECK(v == 0);
    }
    const IgiReconstructor b(1, 1, AccumulatorMode::fixed(16));
    CHECK(b.accumulator().size() == 1);
    CHECK_THROWS_AS(IgiReconstructor(0, 5), std::invalid_argument);
    CHECK_THROWS_AS(AccumulatorMode::fixed(1), std::invalid_argument);
    CHECK_THROWS_AS(AccumulatorMode::fixed(64), std::invalid_argument);
}

TEST_CASE("identical patterns accumulate nothing") {
    IgiReconstructor igi(2, 1);
    feed(igi, 3, {1, 0});
    feed(igi, 9, {1, 0});
    feed(igi, 1, {1, 0});
    CHECK(igi.pairs_count() == 2);
    for (const auto v : igi.accumulator()) {
        CHECK(v == 0);
    }
}

TEST_CASE("identical samples accumulate nothing") {
    IgiReconstructor igi(2, 1);
    feed(igi, 5, {1, 0});
    feed(igi, 5, {0, 1});
    feed(igi, 5, {1, 1});
    for (const auto v : igi.accumulator()) {
        CHECK(v == 0);
    }
}

TEST_CASE("single difference pair by hand") {
    IgiReconstructor igi(2, 1);
    feed(igi, 3, {0, 1});
    feed(igi, 5, {1, 0});
    CHECK(igi.pairs_count() == 1);
    CHECK(igi.accumulator()[0] == 2);
    CHECK(igi.accumulator()[1] == -2);
    const ReconImage img = igi.finalize();
    CHECK(img.values[0] == 1.0);
    CHECK(img.values[1] == -1.0);
}

TEST_CASE("four-measurement worked example") {
    // S = (1,2,2,4) with two-pixel patterns [0,1],[1,1],[1,0],[0,0]:
    // acc = (-1, 0) over 3 pairs, image (-1/6, 0).
    IgiReconstructor igi(2, 1);
    feed(igi, 1, {0, 1});
    feed(igi, 2, {1, 1});
    feed(igi, 2, {1, 0});
    feed(igi, 4, {0, 0});
    CHECK(igi.pairs_count() == 3);
    CHECK(igi.accumulator()[0] == -1);
    CHECK(igi.accumulator()[1] == 0);
    const ReconImage img = igi.finalize();
    CHECK(img.values[0] == doctest::Approx(-1.0 / 6.0).epsilon(1e-15));
    CHECK(img.values[1] == 0.0);

    // and the naive oracle agrees exactly
    const std::vector<std::int64_t> samples{1, 2, 2, 4};
    const std::vector<std::uint8_t> packed{0, 1, 1, 1, 1, 0, 0, 0};
    CHECK(oracles::igi_acc_naive(samples, packed, 2) ==
          std::vector<std::int64_t>{-1, 0});
}

TEST_CASE("fixed-point accumulators saturate and latch the flag") {
    IgiReconstructor igi(1, 1, AccumulatorMode::fixed(8));
    // drive the accumulator to 120, then push 20 more
    feed(igi, 0, {0});
    feed(igi, 120, {1}); // +120
    CHECK(igi.accumulator()[0] == 120);
    CHECK_FALSE(igi.saturated());
    feed(igi, 100, {0}); // ds=-20, di=-1: +20 -> clamps at 127
    CHECK(igi.accumulator()[0] == 127);
    CHECK(igi.saturated());

    IgiReconstructor low(1, 1, AccumulatorMode::fixed(8));
    feed(low, 120, {1});
    feed(low, 0, {0}); // -120... within [-128, 127]
    CHECK(low.accumulator()[0] == 120);
    feed(low, 120, {1});
    feed(low, 0, {0});
    CHECK(low.accumulator()[0] == 127); // 240 clamped
    CHECK(low.saturated());
}

TEST_CASE("finalize requires at least one pair and does not disturb the stream") {
    IgiReconstructor igi(2, 1);
    CHECK_THROWS_AS(igi.finalize(), StateError);
    feed(igi, 1, {0, 1});
    CHECK_THROWS_AS(igi.finalize(), StateError);
    feed(igi, 4, {1, 1});
    const ReconImage first = igi.finalize();
    CHECK(first.values[0] == 1.5);
    feed(igi, 2, {0, 1});
    const ReconImage second = igi.finalize();
    CHECK(second.values.size() == 2);
    CHECK(igi.pairs_count() == 2);
}

TEST_CASE("streaming equals the naive batch evaluation exactly") {
    const std::uint64_t key = rng::derive_key(404, 0);
    std::uint64_t draw = 0;
    for (int rep = 0; rep < 24; ++rep) {
        const std::uint32_t w = 1 + rng::at(key, draw++) % 8;
        const std::uint32_t h = 1 + rng::at(key, draw++) % 8;
        const std::uint64_t count = 2 + rng::at(key, draw++) % 49;
        const std::size_t pixels = static_cast<std::size_t>(w) * h;
        const PatternSpec spec{w, h, 0.5, rng::at(key, draw++)};

        std::vector<std::int64_t> samples;
        std::vector<std::uint8_t> packed;
        IgiReconstructor igi(w, h);
        std::vector<std::uint8_t> bits(pixels);
        for (std::uint64_t n = 1; n <= count; ++n) {
            gen_pattern_into(spec, n, bits);
            const std::int64_t s =
                static_cast<std::int64_t>(rng::at(key, draw++) % 4096);
            igi.step(s, bits);
            samples.push_back(s);
            packed.insert(packed.end(), bits.begin(), bits.end());
        }

        const auto acc = oracles::igi_acc_naive(samples, packed, pixels);
        REQUIRE(std::vector<std::int64_t>(igi.accumulator().begin(),
                                          igi.accumulator().end()) == acc);
        const auto img = oracles::igi_image_naive(samples, packed, pixels);
        CHECK(igi.finalize().values == img);
    }
}

TEST_CASE("mean over all pattern triples equals the measurement covariance") {
    for (int m = 1; m < 4; ++m) { // skip the degenerate all-opaque mask
        const std::uint8_t mask[2] = {static_cast<std::uint8_t>(m & 1),
                                      static_cast<std::uint8_t>(m >> 1)};
        const auto mean_igi = oracles::mean_igi_over_all_triples(mask);
        const auto cov = oracles::covariance_2px_exact(mask);
        for (int x = 0; x < 2; ++x) {
            CHECK(mean_igi[x] == doctest::Approx(cov[x]).epsilon(1e-14));
        }
    }
}

TEST_CASE("scaling every sample scales the image exactly") {
    const PatternSpec spec{4, 4, 0.5, 555};
    const std::uint64_t key = rng::derive_key(556, 0);
    for (const std::int64_t c : {2, 3, 7}) {
        IgiReconstructor plain(4, 4);
        IgiReconstructor scaled(4, 4);
        std::vector<std::uint8_t> bits(16);
        for (std::uint64_t n = 1; n <= 40; ++n) {
            gen_pattern_into(spec, n, bits);
            const std::int64_t s = static_cast<std::int64_t>(rng::at(key, n) % 1000);
            plain.step(s, bits);
            scaled.step(c * s, bits);
        }
        const ReconImage a = plain.finalize();
        const ReconImage b = scaled.finalize();
        for (std::size_t x = 0; x < a.values.size(); ++x) {
            CHECK(b.values[x] == static_cast<double>(c) * a.values[x]);
        }
    }
}

TEST_CASE("memory footprint is independent of the measurement count") {
    const PatternSpec spec{16, 16, 0.5, 808};
    IgiReconstructor igi(16, 16);
    std::vector<std::uint8_t> bits(256);
    for (std::uint64_t n = 1; n <= 10; ++n) {
        gen_pattern_into(spec, n, bits);
        igi.step(static_cast<std::int64_t>(n % 97), bits);
    }
    const std::size_t early = igi.memory_bytes();
    for (std::uint64_t n = 11; n <= 10000; ++n) {
        gen_pattern_into(spec, n, bits);
        igi.step(static_cast<std::int64_t>(n % 97), bits);
    }
    CHECK(igi.memory_bytes() == early);
}

TEST_CASE("cgi basics") {
    SUBCASE("constant samples give the zero image") {
        const std::vector<std::int64_t> samples{4, 4, 4};
        const std::vector<std::uint8_t> packed{1, 0, 0, 1, 1, 1};
        const ReconImage img = cgi_reconstruct(2, 1, samples, packed);
        CHECK(img.values == std::vector<double>{0.0, 0.0});
    }

    SUBCASE("constant patterns give the zero image") {
        const std::vector<std::int64_t> samples{1, 5, 9};
        const std::vector<std::uint8_t> packed{1, 0, 1, 0, 1, 0};
        const ReconImage img = cgi_reconstruct(2, 1, samples, packed);
        CHECK(img.values == std::vector<double>{0.0, 0.0});
    }

    SUBCASE("two-measurement hand example") {
        const std::vector<std::int64_t> samples{1, 3};
        const std::vector<std::uint8_t> packed{0, 1, 1, 1};
        const ReconImage img = cgi_reconstruct(2, 1, samples, packed);
        CHECK(img.values[0] == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(img.values[1] == 0.0);
    }

    SUBCASE("errors") {
        const std::vector<std::int64_t> samples{1, 3};
        const std::vector<std::uint8_t> short_packed{0, 1, 1};
        CHECK_THROWS_AS(cgi_reconstruct(2, 1, samples, short_packed), DimensionMismatch);
        const std::vector<std::int64_t> one{1};
        const std::vector<std::uint8_t> two_bits{0, 1};
        CHECK_THROWS_AS(cgi_reconstruct(2, 1, one, two_bits), std::invalid_argument);
    }
}

TEST_CASE("frame splitting") {
    const PatternSpec spec{2, 2, 0.5, 31};
    std::vector<std::uint8_t> bits(4);

    SUBCASE("frames complete at multiples of N; boundary pairs carry over") {
        FrameStreamer fs(2, 2, AccumulatorMode::exact(), 800);
        std::uint64_t frames = 0;
        for (std::uint64_t n = 1; n <= 1601; ++n) {
            gen_pattern_into(spec, n, bits);
            if (fs.feed(static_cast<std::int64_t>(n % 13), bits)) {
                ++frames;
            }
        }
        CHECK(frames == 2);
        CHECK(fs.frames_completed() == 2);
    }

    SUBCASE("first frame has N-1 pairs, later frames N") {
        FrameStreamer fs(2, 2, AccumulatorMode::exact(), 4);
        std::vector<std::uint64_t> pairs_at_emit;
        for (std::uint64_t n = 1; n <= 12; ++n) {
            gen_pattern_into(spec, n, bits);
            const auto maybe = fs.feed(static_cast<std::int64_t>(n * n % 29), bits);
            if (maybe) {
                pairs_at_emit.push_back(fs.reconstructor().measurements_consumed());
            }
        }
        CHECK(pairs_at_emit == std::vector<std::uint64_t>{4, 8, 12});
    }

    SUBCASE("a frame of N=2 from a fresh stream is a single difference term") {
        FrameStreamer fs(1, 1, AccumulatorMode::exact(), 2);
        std::vector<std::uint8_t> one_bit{1};
        CHECK_FALSE(fs.feed(3, one_bit).has_value());
        one_bit[0] = 0;
        const auto img = fs.feed(5, one_bit);
        REQUIRE(img.has_value());
        // single pair: (5-3)(0-1) = -2, image -2 / (2*1)
        CHECK(img->values[0] == -1.0);
    }

    SUBCASE("later frames equal a boundary-initialized reconstruction") {
        const std::uint64_t n_per_frame = 5;
        FrameStreamer fs(2, 2, AccumulatorMode::exact(), n_per_frame);
        std::optional<ReconImage> second;
        for (std::uint64_t n = 1; n <= 2 * n_per_frame; ++n) {
            gen_pattern_into(spec, n, bits);
            const auto maybe = fs.feed(static_cast<std::int64_t>((3 * n) % 17), bits);
            if (maybe && fs.frames_completed() == 2) {
                second = maybe;
            }
        }
        REQUIRE(second.has_value());

        IgiReconstructor direct(2, 2);
        for (std::uint64_t n = n_per_frame; n <= 2 * n_per_frame; ++n) {
            gen_pattern_into(spec, n, bits);
            direct.step(static_cast<std::int64_t>((3 * n) % 17), bits);
        }
        CHECK(direct.pairs_count() == n_per_frame);
        CHECK(direct.finalize().values == second->values);
    }

    SUBCASE("N below 2 is rejected") {
        CHECK_THROWS_AS(FrameStreamer(2, 2, AccumulatorMode::exact(), 1),
                        std::invalid_argument);
    }
}

TEST_CASE("dimension mismatches are rejected") {
    IgiReconstructor igi(2, 2);
    const std::vector<std::uint8_t> wrong(3, 0);
    CHECK_THROWS_AS(igi.step(1, wrong), DimensionMismatch);
}

} // TEST_SUITE
