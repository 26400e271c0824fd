#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "roadkit/imageops.hpp"
#include "roadkit/rng.hpp"

using namespace roadkit;

namespace {

ImageTensor constant_image(int size, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    ImageTensor img(size, size);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            img.set(x, y, 0, r);
            img.set(x, y, 1, g);
            img.set(x, y, 2, b);
        }
    return img;
}

ImageTensor random_image(int size, Rng& rng) {
    ImageTensor img(size, size);
    for (auto& v : img.data) v = static_cast<std::uint8_t>(rng.next_below(256));
    return img;
}

BinaryMask random_mask(int size, Rng& rng) {
    BinaryMask m(size, size);
    for (auto& v : m.values) v = static_cast<std::uint8_t>(rng.next_below(2));
    return m;
}

}  // namespace

TEST_CASE("cloud filter rejects only when every band mean exceeds the threshold") {
    CHECK(cloud_filter(constant_image(8, 160, 170, 180)).keep == false);
    CHECK(cloud_filter(constant_image(8, 149, 149, 149)).keep == true);
    CHECK(cloud_filter(constant_image(8, 150, 150, 150)).keep == true);  // strict >
    // One band at or below threshold saves the tile.
    CHECK(cloud_filter(constant_image(8, 140, 160, 170)).keep == true);
    CHECK(cloud_filter(constant_image(8, 255, 255, 149)).keep == true);

    auto d = cloud_filter(constant_image(8, 10, 20, 30));
    CHECK(d.band_means[0] == doctest::Approx(10.0));
    CHECK(d.band_means[1] == doctest::Approx(20.0));
    CHECK(d.band_means[2] == doctest::Approx(30.0));

    // Threshold is configurable.
    CHECK(cloud_filter(constant_image(8, 60, 60, 60), 50.0).keep == false);
}

TEST_CASE("cloud band means are invariant under rotation") {
    Rng rng(11);
    ImageTensor img = random_image(16, rng);
    auto base = cloud_filter(img);
    for (int k = 1; k < 4; ++k) {
        auto rot = cloud_filter(rotate90(img, k));
        for (int c = 0; c < 3; ++c)
            CHECK(rot.band_means[c] == doctest::Approx(base.band_means[c]).epsilon(1e-12));
    }
}

TEST_CASE("the two occlusion modes partition the image exactly") {
    Rng rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        ImageTensor img = random_image(12, rng);
        BinaryMask mask = random_mask(12, rng);
        ImageTensor road_only = occlude(img, mask, OcclusionMode::context_occluded);
        ImageTensor context_only = occlude(img, mask, OcclusionMode::road_occluded);
        for (int y = 0; y < 12; ++y)
            for (int x = 0; x < 12; ++x)
                for (int c = 0; c < 3; ++c) {
                    const int sum = road_only.at(x, y, c) + context_only.at(x, y, c);
                    REQUIRE(sum == img.at(x, y, c));
                    if (mask.at(x, y)) {
                        REQUIRE(road_only.at(x, y, c) == img.at(x, y, c));
                        REQUIRE(context_only.at(x, y, c) == 0);
                    } else {
                        REQUIRE(road_only.at(x, y, c) == 0);
                    }
                }
    }
}

TEST_CASE("replace_channel overwrites exactly one plane with the mask") {
    Rng rng(31);
    ImageTensor img = random_image(4, rng);
    BinaryMask mask(4, 4);
    mask.set(1, 2, 1);
    mask.set(3, 0, 1);

    ImageTensor out = replace_channel(img, mask, Channel::B);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) {
            CHECK(out.at(x, y, 0) == img.at(x, y, 0));
            CHECK(out.at(x, y, 1) == img.at(x, y, 1));
            CHECK(out.at(x, y, 2) == (mask.at(x, y) ? 255 : 0));
        }

    ImageTensor out_r = replace_channel(img, mask, Channel::R);
    CHECK(out_r.at(1, 2, 0) == 255);
    CHECK(out_r.at(0, 0, 0) == 0);
    CHECK(out_r.at(1, 2, 1) == img.at(1, 2, 1));
    CHECK(out_r.at(1, 2, 2) == img.at(1, 2, 2));

    // Applying twice is idempotent.
    CHECK(replace_channel(out, mask, Channel::B) == out);
}

TEST_CASE("center crop keeps the central block") {
    ImageTensor img = constant_image(1000, 1, 2, 3);
    img.set(500, 500, 0, 77);
    ImageTensor out = crop_center(img, 224);
    CHECK(out.width == 224);
    CHECK(out.height == 224);
    CHECK(out.at(112, 112, 0) == 77);   // 500 - 388
    CHECK(out.at(0, 0, 0) == 1);
    CHECK(out.at(0, 0, 2) == 3);

    CHECK(crop_center(img, 1000) == img);
    CHECK_THROWS_AS(crop_center(img, 1001), std::invalid_argument);

    BinaryMask m(10, 10);
    m.set(5, 5, 1);
    BinaryMask mc = crop_center(m, 4);
    CHECK(mc.width == 4);
    CHECK(mc.at(2, 2) == 1);  // 5 - 3
    CHECK(mc.count_set() == 1);
}

TEST_CASE("box downsize averages blocks with round-half-up") {
    ImageTensor img(4, 4);
    // Top-left 2x2 block of channel 0: 0, 0, 255, 255 -> mean 127.5 -> 128.
    img.set(0, 0, 0, 0);
    img.set(1, 0, 0, 0);
    img.set(0, 1, 0, 255);
    img.set(1, 1, 0, 255);
    // Top-right block of channel 1: 10, 20, 30, 40 -> mean 25.
    img.set(2, 0, 1, 10);
    img.set(3, 0, 1, 20);
    img.set(2, 1, 1, 30);
    img.set(3, 1, 1, 40);

    ImageTensor out = downsize_box(img, 2);
    CHECK(out.width == 2);
    CHECK(out.height == 2);
    CHECK(out.at(0, 0, 0) == 128);
    CHECK(out.at(1, 0, 1) == 25);
    CHECK(out.at(0, 1, 0) == 0);

    CHECK(downsize_box(img, 1) == img);
    CHECK_THROWS_AS(downsize_box(img, 3), std::invalid_argument);
}

TEST_CASE("majority downsize sets output when at least half the block is set") {
    BinaryMask m(4, 4);
    m.set(0, 0, 1);
    m.set(1, 1, 1);  // top-left block: 2 of 4 -> set
    m.set(2, 0, 1);  // top-right block: 1 of 4 -> unset
    m.set(0, 2, 1);
    m.set(1, 2, 1);
    m.set(0, 3, 1);  // bottom-left block: 3 of 4 -> set

    BinaryMask out = downsize_majority(m, 2);
    CHECK(out.at(0, 0) == 1);
    CHECK(out.at(1, 0) == 0);
    CHECK(out.at(0, 1) == 1);
    CHECK(out.at(1, 1) == 0);
}

TEST_CASE("rotate90 is an exact clockwise quarter turn") {
    ImageTensor img(2, 2);
    img.set(0, 0, 0, 1);   // A
    img.set(1, 0, 0, 2);   // B
    img.set(0, 1, 0, 3);   // C
    img.set(1, 1, 0, 4);   // D

    ImageTensor r1 = rotate90(img, 1);
    CHECK(r1.at(0, 0, 0) == 3);  // old bottom-left reaches top-left
    CHECK(r1.at(1, 0, 0) == 1);
    CHECK(r1.at(1, 1, 0) == 2);
    CHECK(r1.at(0, 1, 0) == 4);

    CHECK(rotate90(img, 4) == img);
    CHECK(rotate90(img, 0) == img);
    CHECK(rotate90(img, -1) == rotate90(img, 3));
    CHECK(rotate90(rotate90(img, 1), 1) == rotate90(img, 2));

    ImageTensor rect(3, 2);
    CHECK_THROWS_AS(rotate90(rect, 1), std::invalid_argument);

    BinaryMask m(3, 3);
    m.set(2, 0, 1);
    BinaryMask mr = rotate90(m, 1);
    CHECK(mr.at(2, 2) == 1);
    CHECK(mr.count_set() == 1);
}

TEST_CASE("binarize_confidence thresholds inclusively and is monotone") {
    ConfidenceMap c(3, 1);
    c.set(0, 0, 0.2f);
    c.set(1, 0, 0.5f);
    c.set(2, 0, 0.9f);

    BinaryMask at_half = binarize_confidence(c, 0.5);
    CHECK(at_half.at(0, 0) == 0);
    CHECK(at_half.at(1, 0) == 1);  // >= threshold counts
    CHECK(at_half.at(2, 0) == 1);

    CHECK(binarize_confidence(c, 0.0).count_set() == 3);

    Rng rng(41);
    ConfidenceMap rc(16, 16);
    for (auto& v : rc.values) v = static_cast<float>(rng.next_double());
    std::size_t prev = 256;
    for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        std::size_t n = binarize_confidence(rc, t).count_set();
        CHECK(n <= prev);
        prev = n;
    }

    CHECK_THROWS_AS(binarize_confidence(c, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(binarize_confidence(c, -0.1), std::invalid_argument);
}
