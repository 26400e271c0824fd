#include "roadkit/geo.hpp"

#include <cmath>
#include <stdexcept>

namespace roadkit {

namespace {
constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) {
        throw std::invalid_argument(std::string("invalid coordinate: non-finite ") + what);
    }
}
}  // namespace

double normalize_lon(double lon) {
    double w = std::fmod(lon + 180.0, 360.0);
    if (w <= 0.0) w += 360.0;
    return w - 180.0;
}

GeoPoint make_geo_point(double lon, double lat) {
    require_finite(lon, "lon");
    require_finite(lat, "lat");
    if (lat < -90.0 || lat > 90.0) {
        throw std::invalid_argument("invalid coordinate: lat out of [-90, 90]");
    }
    return GeoPoint{normalize_lon(lon), lat};
}

TileGeoref make_tile_georef(GeoPoint center, double size_m, int size_px) {
    if (!(size_m > 0.0)) throw std::invalid_argument("tile size_m must be > 0");
    if (size_px <= 0) throw std::invalid_argument("tile size_px must be > 0");
    return TileGeoref{center, size_m, size_px};
}

PixelPoint geo_to_pixel(const TileGeoref& g, const GeoPoint& p) {
    require_finite(p.lon, "lon");
    require_finite(p.lat, "lat");
    const double cos_lat = std::cos(g.center.lat * kDegToRad);
    const double east_m = (p.lon - g.center.lon) * kDegToRad * kEarthRadiusM * cos_lat;
    const double north_m = (p.lat - g.center.lat) * kDegToRad * kEarthRadiusM;
    const double half = static_cast<double>(g.size_px) / 2.0;
    return PixelPoint{half + east_m / g.gsd(), half - north_m / g.gsd()};
}

GeoPoint pixel_to_geo(const TileGeoref& g, const PixelPoint& q) {
    require_finite(q.x, "x");
    require_finite(q.y, "y");
    const double cos_lat = std::cos(g.center.lat * kDegToRad);
    const double half = static_cast<double>(g.size_px) / 2.0;
    const double east_m = (q.x - half) * g.gsd();
    const double north_m = (half - q.y) * g.gsd();
    const double lon = g.center.lon + east_m / (kEarthRadiusM * cos_lat) / kDegToRad;
    const double lat = g.center.lat + north_m / kEarthRadiusM / kDegToRad;
    return GeoPoint{lon, lat};
}

}  // namespace roadkit
