#include "roadkit/osm_ingest.hpp"

#include <nlohmann/json.hpp>

#include <limits>
#include <stdexcept>

#include "roadkit/rng.hpp"

namespace roadkit {

using nlohmann::json;

std::string to_string(RoadLabel label) {
    switch (label) {
        case RoadLabel::major: return "major";
        case RoadLabel::minor: return "minor";
        case RoadLabel::two_track: return "two_track";
    }
    throw std::logic_error("bad road label");
}

RoadLabel road_label_from_string(const std::string& s) {
    if (s == "major") return RoadLabel::major;
    if (s == "minor") return RoadLabel::minor;
    if (s == "two_track") return RoadLabel::two_track;
    throw std::invalid_argument("unknown road label: " + s);
}

ClassMap ClassMap::standard() {
    ClassMap m;
    for (const char* tag : {"motorway", "trunk", "primary", "motorway_link", "trunk_link",
                            "primary_link"}) {
        m.table_[tag] = RoadLabel::major;
    }
    for (const char* tag : {"secondary", "tertiary", "unclassified", "residential",
                            "secondary_link", "tertiary_link"}) {
        m.table_[tag] = RoadLabel::minor;
    }
    m.table_["track"] = RoadLabel::two_track;
    return m;
}

ClassMap ClassMap::from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("class map: ") + e.what());
    }
    if (!j.is_object()) throw std::runtime_error("class map must be a JSON object {tag: label}");
    ClassMap m;
    for (const auto& [tag, value] : j.items()) {
        m.table_[tag] = road_label_from_string(value.get<std::string>());
    }
    return m;
}

std::optional<RoadLabel> ClassMap::map_highway_class(const std::string& raw_tag) const {
    const auto it = table_.find(raw_tag);
    if (it == table_.end()) return std::nullopt;
    return it->second;
}

std::vector<RoadRecord> parse_roads(const std::string& document, const std::string& domain,
                                    const ClassMap& class_map, ParseStats* stats) {
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::parse_error& e) {
        // nlohmann reports line and column in the message
        throw std::runtime_error(std::string("GeoJSON parse error: ") + e.what());
    }
    if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" ||
        !doc.contains("features") || !doc["features"].is_array()) {
        throw std::runtime_error("GeoJSON document is not a FeatureCollection");
    }

    ParseStats local;
    ParseStats& st = stats ? *stats : local;
    std::vector<RoadRecord> out;
    std::size_t feature_index = 0;
    for (const auto& feature : doc["features"]) {
        const std::size_t index = feature_index++;
        if (!feature.is_object() || feature.value("type", "") != "Feature") {
            st.skipped_not_road += 1;
            continue;
        }
        const auto& geometry = feature.contains("geometry") ? feature["geometry"] : json();
        if (!geometry.is_object() || geometry.value("type", "") != "LineString") {
            st.skipped_not_road += 1;
            continue;
        }
        const auto& properties = feature.contains("properties") ? feature["properties"] : json();
        if (!properties.is_object() || !properties.contains("highway") ||
            !properties["highway"].is_string()) {
            st.skipped_not_road += 1;
            continue;
        }
        const std::string raw_tag = properties["highway"].get<std::string>();
        const auto label = class_map.map_highway_class(raw_tag);
        if (!label) {
            st.skipped_unmappable += 1;
            continue;
        }

        RoadRecord record;
        record.raw_tag = raw_tag;
        record.label = *label;
        record.domain = domain;
        if (properties.contains("id")) {
            const auto& id = properties["id"];
            record.road_id = id.is_string() ? id.get<std::string>() : id.dump();
        } else if (feature.contains("id")) {
            const auto& id = feature["id"];
            record.road_id = id.is_string() ? id.get<std::string>() : id.dump();
        } else {
            record.road_id = "feature-" + std::to_string(index);
        }

        bool bad = false;
        const auto& coords = geometry.contains("coordinates") ? geometry["coordinates"] : json();
        if (!coords.is_array()) {
            bad = true;
        } else {
            for (const auto& pair : coords) {
                if (!pair.is_array() || pair.size() < 2 || !pair[0].is_number() ||
                    !pair[1].is_number()) {
                    bad = true;
                    break;
                }
                GeoPoint p;
                try {
                    p = make_geo_point(pair[0].get<double>(), pair[1].get<double>());
                } catch (const std::exception&) {
                    bad = true;
                    break;
                }
                // drop consecutive duplicates
                if (!record.polyline.empty() && record.polyline.back().lon == p.lon &&
                    record.polyline.back().lat == p.lat) {
                    continue;
                }
                record.polyline.push_back(p);
            }
        }
        if (bad) {
            st.feature_errors.push_back("feature " + std::to_string(index) +
                                        ": malformed LineString coordinates");
            st.skipped_short += 1;
            continue;
        }
        if (record.polyline.size() < 2) {
            st.feature_errors.push_back("feature " + std::to_string(index) +
                                        ": LineString has fewer than 2 distinct points");
            st.skipped_short += 1;
            continue;
        }
        st.mapped += 1;
        out.push_back(std::move(record));
    }
    return out;
}

std::string roads_to_geojson(const std::vector<RoadRecord>& roads) {
    nlohmann::ordered_json doc;
    doc["type"] = "FeatureCollection";
    auto& features = doc["features"] = nlohmann::ordered_json::array();
    for (const auto& r : roads) {
        nlohmann::ordered_json f;
        f["type"] = "Feature";
        f["properties"] = {{"highway", r.raw_tag}, {"id", r.road_id}};
        f["geometry"]["type"] = "LineString";
        auto& coords = f["geometry"]["coordinates"] = nlohmann::ordered_json::array();
        for (const auto& p : r.polyline) {
            coords.push_back({p.lon, p.lat});
        }
        features.push_back(std::move(f));
    }
    return doc.dump();
}

std::vector<GeoPoint> sample_anchor_points(const RoadRecord& road, std::size_t k,
                                           std::uint64_t rng_seed) {
    const std::size_t n = road.polyline.size();
    if (k < 1) throw std::invalid_argument("sample_anchor_points: k must be >= 1");
    if (k > n) {
        throw std::invalid_argument("road too short for " + std::to_string(k) + " anchors: '" +
                                    road.road_id + "' has " + std::to_string(n) + " vertices");
    }
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    Rng rng = Rng::keyed(rng_seed, road.road_id);
    std::vector<GeoPoint> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + rng.next_below(n - i);
        std::swap(idx[i], idx[j]);
        out.push_back(road.polyline[idx[i]]);
    }
    return out;
}

TileGeoref make_tile(const GeoPoint& anchor) {
    return make_tile_georef(anchor, 300.0, 1000);
}

ClassDistribution class_distribution(const std::vector<RoadRecord>& records) {
    ClassDistribution d;
    for (RoadLabel l : {RoadLabel::major, RoadLabel::minor, RoadLabel::two_track}) {
        d.counts[l] = 0;
    }
    for (const auto& r : records) d.counts[r.label] += 1;

    std::int64_t smallest = std::numeric_limits<std::int64_t>::max();
    for (const auto& [label, count] : d.counts) {
        if (count > 0 && count < smallest) smallest = count;
    }
    if (smallest == std::numeric_limits<std::int64_t>::max()) {
        d.ratio_defined = false;
        for (const auto& [label, count] : d.counts) d.ratio[label] = 0.0;
        return d;
    }
    d.ratio_defined = true;
    for (const auto& [label, count] : d.counts) {
        d.ratio[label] = static_cast<double>(count) / static_cast<double>(smallest);
    }
    return d;
}

}  // namespace roadkit
