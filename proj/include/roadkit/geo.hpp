#pragma once

#include <string>

namespace roadkit {

// WGS84 spherical radius used for the local tangent projection.
inline constexpr double kEarthRadiusM = 6378137.0;

struct GeoPoint {
    double lon = 0.0;  // degrees, normalized to (-180, 180]
    double lat = 0.0;  // degrees, [-90, 90]
};

struct PixelPoint {
    double x = 0.0;  // column, rightward = east
    double y = 0.0;  // row, downward = south
};

/// Georeferencing of one square tile: north-up image of size_px pixels
/// covering size_m meters, centered on `center`.
struct TileGeoref {
    GeoPoint center;
    double size_m = 300.0;
    int size_px = 1000;

    double gsd() const { return size_m / static_cast<double>(size_px); }
};

double normalize_lon(double lon);

/// Validating constructor: throws on non-finite input or lat out of
/// [-90, 90]; lon is wrapped into (-180, 180].
GeoPoint make_geo_point(double lon, double lat);

TileGeoref make_tile_georef(GeoPoint center, double size_m = 300.0, int size_px = 1000);

// Local equirectangular projection about the tile center with
// cos(lat_center) scaling. Tile center maps to (size_px/2, size_px/2);
// x grows east, y grows south.
PixelPoint geo_to_pixel(const TileGeoref& g, const GeoPoint& p);
GeoPoint pixel_to_geo(const TileGeoref& g, const PixelPoint& q);

}  // namespace roadkit
