#include "roadkit/raster.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <string>

namespace roadkit {

BinaryMask::BinaryMask(int w, int h) : width(w), height(h) {
    if (w < 1 || h < 1) throw std::invalid_argument("mask dimensions must be >= 1");
    values.assign(static_cast<std::size_t>(w) * h, 0);
}

std::size_t BinaryMask::count_set() const {
    return static_cast<std::size_t>(std::accumulate(values.begin(), values.end(), std::size_t{0}));
}

namespace {

// Classic integer error-accumulation walk, emitted a -> b.
std::vector<PixelPair> bresenham_walk(PixelPair a, PixelPair b) {
    std::vector<PixelPair> out;
    const int dx = std::abs(b.x - a.x);
    const int dy = -std::abs(b.y - a.y);
    const int sx = a.x < b.x ? 1 : -1;
    const int sy = a.y < b.y ? 1 : -1;
    out.reserve(static_cast<std::size_t>(std::max(dx, -dy)) + 1);
    int err = dx + dy;
    int x = a.x, y = a.y;
    for (;;) {
        out.push_back({x, y});
        if (x == b.x && y == b.y) break;
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y += sy;
        }
    }
    return out;
}

bool lex_less(PixelPair a, PixelPair b) {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
}

int round_half_up(double v) {
    return static_cast<int>(std::floor(v + 0.5));
}

}  // namespace

std::vector<PixelPair> bresenham(PixelPair p0, PixelPair p1) {
    if (lex_less(p1, p0)) {
        auto px = bresenham_walk(p1, p0);
        std::reverse(px.begin(), px.end());
        return px;
    }
    return bresenham_walk(p0, p1);
}

std::vector<PixelPair> clip_points_to_crop(const std::vector<PixelPoint>& points, const CropRect& crop) {
    std::vector<PixelPair> out;
    out.reserve(points.size());
    for (const auto& p : points) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) continue;
        const int xi = round_half_up(p.x);
        const int yi = round_half_up(p.y);
        if (xi < crop.x0 || xi >= crop.x0 + crop.width) continue;
        if (yi < crop.y0 || yi >= crop.y0 + crop.height) continue;
        out.push_back({xi - crop.x0, yi - crop.y0});
    }
    return out;
}

BinaryMask rasterize_polyline(const std::vector<PixelPair>& points, int width, int height) {
    BinaryMask mask(width, height);
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!mask.in_bounds(points[i].x, points[i].y)) {
            throw std::invalid_argument("rasterize_polyline: point " + std::to_string(i) +
                                        " at (" + std::to_string(points[i].x) + "," +
                                        std::to_string(points[i].y) + ") out of bounds");
        }
    }
    if (points.size() == 1) {
        mask.set(points[0].x, points[0].y, 1);
        return mask;
    }
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        for (const auto& px : bresenham(points[i], points[i + 1])) {
            mask.set(px.x, px.y, 1);
        }
    }
    return mask;
}

const std::vector<PixelPair>& disk_offsets(int radius) {
    static std::map<int, std::vector<PixelPair>> cache;
    static std::mutex cache_mutex;
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto it = cache.find(radius);
    if (it != cache.end()) return it->second;
    std::vector<PixelPair> offsets;
    const long r2 = static_cast<long>(radius) * radius;
    for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
            if (static_cast<long>(dx) * dx + static_cast<long>(dy) * dy <= r2) {
                offsets.push_back({dx, dy});
            }
        }
    }
    return cache.emplace(radius, std::move(offsets)).first->second;
}

BinaryMask dilate(const BinaryMask& mask, int radius) {
    if (radius < 0) throw std::invalid_argument("dilate: radius must be >= 0");
    if (radius == 0) return mask;
    const auto& offsets = disk_offsets(radius);
    BinaryMask out(mask.width, mask.height);
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            if (!mask.at(x, y)) continue;
            for (const auto& d : offsets) {
                const int nx = x + d.x;
                const int ny = y + d.y;
                if (out.in_bounds(nx, ny)) out.set(nx, ny, 1);
            }
        }
    }
    return out;
}

CropRect center_crop_rect(int full, int target) {
    if (target < 1) throw std::invalid_argument("center_crop_rect: target must be >= 1");
    if (target > full) {
        throw std::invalid_argument("center_crop_rect: target " + std::to_string(target) +
                                    " exceeds full extent " + std::to_string(full));
    }
    const int offset = (full - target) / 2;
    return CropRect{offset, offset, target, target};
}

}  // namespace roadkit
