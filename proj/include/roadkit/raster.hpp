#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "roadkit/geo.hpp"

namespace roadkit {

struct PixelPair {
    int x = 0;
    int y = 0;

    friend bool operator==(const PixelPair&, const PixelPair&) = default;
};

/// Binary raster, row-major, one value in {0, 1} per pixel.
struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> values;  // size width*height

    BinaryMask() = default;
    BinaryMask(int w, int h);

    std::uint8_t at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
    void set(int x, int y, std::uint8_t v) { values[static_cast<std::size_t>(y) * width + x] = v; }
    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
    std::size_t count_set() const;

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;
};

struct CropRect {
    int x0 = 0;  // inclusive
    int y0 = 0;
    int width = 0;
    int height = 0;
};

/// 8-connected integer Bresenham segment including both endpoints.
/// Segments are canonicalized so the lexicographically smaller endpoint
/// drives the error accumulation; the emitted order always runs p0 -> p1,
/// hence bresenham(a, b) == reverse(bresenham(b, a)) exactly.
std::vector<PixelPair> bresenham(PixelPair p0, PixelPair p1);

/// Drops points whose nearest-integer pixel falls outside `crop`, rounds
/// survivors, and translates them to crop-local coordinates. Order kept.
std::vector<PixelPair> clip_points_to_crop(const std::vector<PixelPoint>& points, const CropRect& crop);

/// Union of Bresenham segments between consecutive points. A single point
/// sets one pixel; an empty input gives an all-zero mask.
BinaryMask rasterize_polyline(const std::vector<PixelPair>& points, int width, int height);

/// Euclidean disk dilation: output pixel is set iff some input set pixel
/// lies within distance <= radius. Boundary-clipped, exact.
BinaryMask dilate(const BinaryMask& mask, int radius);

/// Centered target x target rectangle inside a full x full image,
/// offset (full - target) / 2 with integer floor division.
CropRect center_crop_rect(int full, int target);

/// All integer offsets (dx, dy) with dx^2 + dy^2 <= radius^2.
const std::vector<PixelPair>& disk_offsets(int radius);

}  // namespace roadkit
