#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "roadkit/raster.hpp"

namespace roadkit {

/// 8-bit RGB raster, row-major, channel-interleaved (R, G, B).
struct ImageTensor {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> data;  // size height*width*3

    ImageTensor() = default;
    ImageTensor(int w, int h);

    static constexpr int channels = 3;

    std::size_t index(int x, int y, int c) const {
        return (static_cast<std::size_t>(y) * width + x) * channels + c;
    }
    std::uint8_t at(int x, int y, int c) const { return data[index(x, y, c)]; }
    void set(int x, int y, int c, std::uint8_t v) { data[index(x, y, c)] = v; }

    friend bool operator==(const ImageTensor&, const ImageTensor&) = default;
};

/// Per-pixel real confidence in [0, 1], row-major.
struct ConfidenceMap {
    int height = 0;
    int width = 0;
    std::vector<float> values;  // size height*width

    ConfidenceMap() = default;
    ConfidenceMap(int w, int h);

    float at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
    void set(int x, int y, float v) { values[static_cast<std::size_t>(y) * width + x] = v; }
};

enum class OcclusionMode {
    context_occluded,  // out = img * mask        (road visible only)
    road_occluded,     // out = img * (1 - mask)  (context visible only)
};

enum class Channel : int { R = 0, G = 1, B = 2 };

struct CloudDecision {
    bool keep = true;
    std::array<double, 3> band_means{};  // R, G, B
};

/// Rejects iff all three band means exceed the threshold (strict >).
CloudDecision cloud_filter(const ImageTensor& img, double threshold = 150.0);

ImageTensor occlude(const ImageTensor& img, const BinaryMask& mask, OcclusionMode mode);

/// Replaces one channel with mask * 255; the other two are untouched.
ImageTensor replace_channel(const ImageTensor& img, const BinaryMask& mask, Channel channel = Channel::B);

ImageTensor crop_center(const ImageTensor& img, int target);
BinaryMask crop_center(const BinaryMask& mask, int target);

/// Box downsize: each output sample is the round-half-up mean of the
/// factor x factor input block, per channel. Factor must divide both dims.
ImageTensor downsize_box(const ImageTensor& img, int factor);

/// Majority-vote box downsize for masks: output set iff at least half of
/// the block is set.
BinaryMask downsize_majority(const BinaryMask& mask, int factor);

/// Exact clockwise rotation by quarter_turns * 90 degrees. Square input.
ImageTensor rotate90(const ImageTensor& img, int quarter_turns);
BinaryMask rotate90(const BinaryMask& mask, int quarter_turns);

/// Pixel set iff confidence >= threshold.
BinaryMask binarize_confidence(const ConfidenceMap& c, double threshold);

}  // namespace roadkit
