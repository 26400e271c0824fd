#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "roadkit/png_io.hpp"
#include "roadkit/rng.hpp"
#include "test_support.hpp"

using namespace roadkit;
using namespace test_support;

TEST_CASE("RGB PNG roundtrip preserves every sample") {
    TempDir tmp("png-rgb");
    Rng rng(1);
    ImageTensor img(37, 23);
    for (auto& v : img.data) v = static_cast<std::uint8_t>(rng.next_below(256));

    const auto path = tmp.path / "img.png";
    write_png_rgb8(path, img);
    CHECK(read_png_rgb8(path) == img);
}

TEST_CASE("mask PNG roundtrip and value encoding") {
    TempDir tmp("png-mask");
    Rng rng(2);
    BinaryMask mask(64, 64);
    for (auto& v : mask.values) v = static_cast<std::uint8_t>(rng.next_below(2));

    const auto path = tmp.path / "mask.png";
    write_png_mask(path, mask);
    CHECK(read_png_mask(path) == mask);

    // On disk the mask is 8-bit gray {0, 255}; reading it back as a
    // confidence map must give exactly 0 or 1.
    ConfidenceMap as_conf = read_png_confidence(path);
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x)
            CHECK(as_conf.at(x, y) == doctest::Approx(mask.at(x, y) ? 1.0 : 0.0));
}

TEST_CASE("confidence PNG roundtrip is exact at 16-bit resolution") {
    TempDir tmp("png-conf");
    Rng rng(3);
    ConfidenceMap conf(19, 31);
    for (auto& v : conf.values) v = static_cast<float>(rng.next_double());

    const auto path = tmp.path / "conf.png";
    write_png_confidence(path, conf);
    ConfidenceMap back = read_png_confidence(path);
    REQUIRE(back.width == 19);
    REQUIRE(back.height == 31);
    for (int y = 0; y < 31; ++y)
        for (int x = 0; x < 19; ++x)
            REQUIRE(back.at(x, y) == doctest::Approx(conf.at(x, y)).epsilon(1.0 / 65535.0));

    // Exact codes survive a second trip untouched.
    write_png_confidence(path, back);
    ConfidenceMap again = read_png_confidence(path);
    for (std::size_t i = 0; i < back.values.size(); ++i) REQUIRE(again.values[i] == back.values[i]);
}

TEST_CASE("writers are byte-deterministic") {
    TempDir tmp("png-bytes");
    Rng rng(4);
    ImageTensor img(50, 40);
    for (auto& v : img.data) v = static_cast<std::uint8_t>(rng.next_below(256));

    write_png_rgb8(tmp.path / "a.png", img);
    write_png_rgb8(tmp.path / "b.png", img);
    CHECK(slurp(tmp.path / "a.png") == slurp(tmp.path / "b.png"));

    BinaryMask mask(50, 40);
    for (auto& v : mask.values) v = static_cast<std::uint8_t>(rng.next_below(2));
    write_png_mask(tmp.path / "m1.png", mask);
    write_png_mask(tmp.path / "m2.png", mask);
    CHECK(slurp(tmp.path / "m1.png") == slurp(tmp.path / "m2.png"));
}

TEST_CASE("reading a missing or wrong-format file fails loudly") {
    TempDir tmp("png-errors");
    CHECK_THROWS_AS(read_png_rgb8(tmp.path / "absent.png"), std::runtime_error);

    spit(tmp.path / "not_a_png.png", "this is text");
    CHECK_THROWS_AS(read_png_rgb8(tmp.path / "not_a_png.png"), std::runtime_error);

    // A mask reader pointed at an RGB image is a caller bug.
    ImageTensor img(4, 4);
    write_png_rgb8(tmp.path / "rgb.png", img);
    CHECK_THROWS_AS(read_png_mask(tmp.path / "rgb.png"), std::runtime_error);
}
