#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "roadkit/geo.hpp"

namespace roadkit {

enum class RoadLabel { major, minor, two_track };

std::string to_string(RoadLabel label);
RoadLabel road_label_from_string(const std::string& s);

/// One OSM way: ordered GPS polyline plus the mapped 3-class label.
struct RoadRecord {
    std::string road_id;
    std::vector<GeoPoint> polyline;  // >= 2 points, consecutive points distinct
    std::string raw_tag;             // OSM highway value
    RoadLabel label = RoadLabel::minor;
    std::string domain;
};

/// highway tag -> 3-class mapping. The paper's aggregation is a declared
/// convention here; a JSON object {tag: label} replaces the whole table.
class ClassMap {
public:
    static ClassMap standard();
    static ClassMap from_json(const std::string& json_text);

    std::optional<RoadLabel> map_highway_class(const std::string& raw_tag) const;

private:
    std::map<std::string, RoadLabel> table_;
};

struct ParseStats {
    std::size_t mapped = 0;
    std::size_t skipped_unmappable = 0;   // highway value not in the table
    std::size_t skipped_short = 0;        // LineString with < 2 distinct points
    std::size_t skipped_not_road = 0;     // wrong geometry or no highway property
    std::vector<std::string> feature_errors;
};

/// Parses a GeoJSON FeatureCollection (LineString features with a
/// "highway" property) into RoadRecords, input order preserved.
std::vector<RoadRecord> parse_roads(const std::string& document, const std::string& domain,
                                    const ClassMap& class_map = ClassMap::standard(),
                                    ParseStats* stats = nullptr);

/// Serializes records back to a GeoJSON FeatureCollection.
std::string roads_to_geojson(const std::vector<RoadRecord>& roads);

/// Draws k distinct polyline vertices uniformly without replacement.
/// Deterministic in (road.road_id, rng_seed).
std::vector<GeoPoint> sample_anchor_points(const RoadRecord& road, std::size_t k,
                                           std::uint64_t rng_seed);

/// Tile georef centered on the anchor: 300 m, 1000 px (0.3 m/px).
TileGeoref make_tile(const GeoPoint& anchor);

struct ClassDistribution {
    std::map<RoadLabel, std::int64_t> counts;
    std::map<RoadLabel, double> ratio;  // smallest nonzero class normalized to 1
    bool ratio_defined = false;
};

ClassDistribution class_distribution(const std::vector<RoadRecord>& records);

}  // namespace roadkit
