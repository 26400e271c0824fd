#include "roadkit/pipeline.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "roadkit/imageops.hpp"
#include "roadkit/parallel.hpp"
#include "roadkit/png_io.hpp"
#include "roadkit/raster.hpp"

namespace roadkit {

namespace {

using nlohmann::ordered_json;

ordered_json geo_array(const GeoPoint& p) { return ordered_json::array({p.lon, p.lat}); }

GeoPoint geo_from_array(const nlohmann::json& j, const char* what) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw std::runtime_error(std::string(what) + ": expected [lon, lat]");
    return make_geo_point(j[0].get<double>(), j[1].get<double>());
}

std::string sanitize_id(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        bool ok = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                  c == '-' || c == '_' || c == '.';
        out.push_back(ok ? c : '_');
    }
    return out;
}

std::filesystem::path resolve_uri(const std::filesystem::path& base, const std::string& uri) {
    std::filesystem::path p(uri);
    return p.is_absolute() ? p : base / p;
}

ordered_json distribution_json(const ClassDistribution& d) {
    ordered_json counts = ordered_json::object();
    ordered_json ratio = ordered_json::object();
    for (const auto& [label, n] : d.counts) counts[to_string(label)] = n;
    if (d.ratio_defined) {
        for (const auto& [label, r] : d.ratio) ratio[to_string(label)] = r;
    }
    ordered_json out;
    out["counts"] = counts;
    out["ratio"] = d.ratio_defined ? ratio : ordered_json(nullptr);
    return out;
}

}  // namespace

std::string to_string(PrepOcclusion v) {
    switch (v) {
        case PrepOcclusion::none: return "none";
        case PrepOcclusion::context: return "context";
        case PrepOcclusion::road: return "road";
        case PrepOcclusion::channel_replace: return "channel-replace";
    }
    throw std::logic_error("bad occlusion enum");
}

PrepOcclusion occlusion_from_string(const std::string& s) {
    if (s == "none") return PrepOcclusion::none;
    if (s == "context") return PrepOcclusion::context;
    if (s == "road") return PrepOcclusion::road;
    if (s == "channel-replace") return PrepOcclusion::channel_replace;
    throw std::invalid_argument("unknown occlusion mode: " + s);
}

std::string to_string(GeometryMode v) {
    return v == GeometryMode::crop_only ? "crop" : "crop-downsize";
}

GeometryMode geometry_from_string(const std::string& s) {
    if (s == "crop") return GeometryMode::crop_only;
    if (s == "crop-downsize") return GeometryMode::crop_downsize;
    throw std::invalid_argument("unknown geometry mode: " + s);
}

void write_roads_file(const std::vector<TileRecord>& tiles, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open roads file for writing: " + path.string());
    for (const auto& t : tiles) {
        ordered_json row;
        row["tile_id"] = t.tile_id;
        row["road_id"] = t.road_id;
        row["label"] = to_string(t.label);
        row["domain"] = t.domain;
        row["center"] = geo_array(t.center);
        row["size_m"] = t.size_m;
        row["size_px"] = t.size_px;
        ordered_json poly = ordered_json::array();
        for (const auto& p : t.polyline) poly.push_back(geo_array(p));
        row["polyline"] = poly;
        out << row.dump() << '\n';
    }
    if (!out) throw std::runtime_error("failed writing roads file: " + path.string());
}

std::vector<TileRecord> read_roads_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open roads file: " + path.string());
    std::vector<TileRecord> tiles;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json row;
        try {
            row = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        try {
            TileRecord t;
            t.tile_id = row.at("tile_id").get<std::string>();
            t.road_id = row.at("road_id").get<std::string>();
            t.label = road_label_from_string(row.at("label").get<std::string>());
            t.domain = row.at("domain").get<std::string>();
            t.center = geo_from_array(row.at("center"), "center");
            t.size_m = row.at("size_m").get<double>();
            t.size_px = row.at("size_px").get<int>();
            if (!(t.size_m > 0.0) || t.size_px < 1)
                throw std::runtime_error("tile size must be positive");
            for (const auto& p : row.at("polyline"))
                t.polyline.push_back(geo_from_array(p, "polyline"));
            tiles.push_back(std::move(t));
        } catch (const std::exception& e) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return tiles;
}

ordered_json run_config_to_json(const RunConfig& c) {
    ordered_json j;
    j["seed"] = c.seed;
    j["radius"] = c.radius;
    j["decloud_threshold"] = c.decloud_threshold;
    j["crop"] = c.crop;
    j["occlusion"] = to_string(c.occlusion);
    j["geometry"] = to_string(c.geometry);
    j["domain"] = c.domain;
    j["points_per_road"] = c.points_per_road;
    j["threads"] = c.threads;
    return j;
}

RunConfig run_config_from_json(const ordered_json& j, RunConfig base) {
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (key == "seed") base.seed = value.get<std::uint64_t>();
        else if (key == "radius") base.radius = value.get<int>();
        else if (key == "decloud_threshold") base.decloud_threshold = value.get<double>();
        else if (key == "crop") base.crop = value.get<int>();
        else if (key == "occlusion") base.occlusion = occlusion_from_string(value.get<std::string>());
        else if (key == "geometry") base.geometry = geometry_from_string(value.get<std::string>());
        else if (key == "domain") base.domain = value.get<std::string>();
        else if (key == "points_per_road") base.points_per_road = value.get<int>();
        else if (key == "threads") base.threads = value.get<int>();
        else throw std::invalid_argument("unknown config key: " + key);
    }
    if (base.radius < 0) throw std::invalid_argument("radius must be >= 0");
    if (base.crop < 1) throw std::invalid_argument("crop must be >= 1");
    if (base.points_per_road < 1) throw std::invalid_argument("points_per_road must be >= 1");
    if (base.threads < 1) throw std::invalid_argument("threads must be >= 1");
    return base;
}

ordered_json IngestSummary::to_json() const {
    ordered_json j;
    j["roads"] = roads;
    j["tiles"] = tiles;
    j["skipped_unmappable"] = skipped_unmappable;
    j["skipped_short"] = skipped_short;
    j["skipped_not_road"] = skipped_not_road;
    j["clamped_roads"] = clamped_roads;
    j["class_distribution"] = distribution_json(distribution);
    return j;
}

IngestSummary run_ingest(const std::filesystem::path& geojson_path, const std::string& domain,
                         const RunConfig& config, const std::filesystem::path& roads_out,
                         const std::optional<std::filesystem::path>& class_map_path) {
    std::ifstream in(geojson_path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open GeoJSON file: " + geojson_path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();

    ClassMap class_map = ClassMap::standard();
    if (class_map_path) {
        std::ifstream cm(*class_map_path, std::ios::binary);
        if (!cm) throw std::runtime_error("cannot open class map: " + class_map_path->string());
        std::stringstream cm_buffer;
        cm_buffer << cm.rdbuf();
        class_map = ClassMap::from_json(cm_buffer.str());
    }

    ParseStats stats;
    std::vector<RoadRecord> roads = parse_roads(buffer.str(), domain, class_map, &stats);

    IngestSummary summary;
    summary.roads = roads.size();
    summary.skipped_unmappable = stats.skipped_unmappable;
    summary.skipped_short = stats.skipped_short;
    summary.skipped_not_road = stats.skipped_not_road;
    summary.distribution = class_distribution(roads);

    std::vector<TileRecord> tiles;
    for (const auto& road : roads) {
        std::size_t k = static_cast<std::size_t>(config.points_per_road);
        if (k > road.polyline.size()) {
            k = road.polyline.size();
            ++summary.clamped_roads;
        }
        std::vector<GeoPoint> anchors = sample_anchor_points(road, k, config.seed);
        for (std::size_t j = 0; j < anchors.size(); ++j) {
            TileRecord t;
            t.tile_id = domain + "-" + sanitize_id(road.road_id) + "-" + std::to_string(j);
            t.road_id = road.road_id;
            t.label = road.label;
            t.domain = domain;
            TileGeoref g = make_tile(anchors[j]);
            t.center = g.center;
            t.size_m = g.size_m;
            t.size_px = g.size_px;
            t.polyline = road.polyline;
            tiles.push_back(std::move(t));
        }
    }
    summary.tiles = tiles.size();
    write_roads_file(tiles, roads_out);
    return summary;
}

BinaryMask build_road_mask(const TileRecord& tile, int radius) {
    TileGeoref g = make_tile_georef(tile.center, tile.size_m, tile.size_px);
    std::vector<PixelPoint> pts;
    pts.reserve(tile.polyline.size());
    for (const auto& p : tile.polyline) pts.push_back(geo_to_pixel(g, p));
    CropRect full{0, 0, tile.size_px, tile.size_px};
    std::vector<PixelPair> clipped = clip_points_to_crop(pts, full);
    BinaryMask mask = rasterize_polyline(clipped, tile.size_px, tile.size_px);
    return dilate(mask, radius);
}

ordered_json PrepareSummary::to_json() const {
    ordered_json j;
    j["prepared"] = prepared;
    j["rejected_clouds"] = rejected_clouds;
    j["missing_tiles"] = missing_tiles;
    j["sample_errors"] = sample_errors;
    return j;
}

PrepareSummary prepare_dataset(const std::filesystem::path& tiles_dir,
                               const std::filesystem::path& roads_file,
                               const std::filesystem::path& out_dir, const RunConfig& config) {
    std::vector<TileRecord> tiles = read_roads_file(roads_file);
    if (tiles.empty()) throw std::runtime_error("roads file has no tiles: " + roads_file.string());
    {
        std::set<std::string> seen;
        for (const auto& t : tiles)
            if (!seen.insert(t.tile_id).second)
                throw std::runtime_error("duplicate tile_id in roads file: " + t.tile_id);
    }

    std::filesystem::create_directories(out_dir / "images");
    std::filesystem::create_directories(out_dir / "masks");

    enum class Outcome { ok, missing, cloud, error };
    std::vector<Outcome> outcomes(tiles.size(), Outcome::error);
    std::vector<SampleRecord> slots(tiles.size());
    std::vector<std::string> errors(tiles.size());

    parallel_for(tiles.size(), config.threads, [&](std::size_t i) {
        const TileRecord& tile = tiles[i];
        std::filesystem::path tile_path = tiles_dir / (tile.tile_id + ".png");
        if (!std::filesystem::exists(tile_path)) {
            outcomes[i] = Outcome::missing;
            errors[i] = tile.tile_id + ": tile image not found";
            return;
        }
        try {
            ImageTensor img = read_png_rgb8(tile_path);
            if (img.width != tile.size_px || img.height != tile.size_px)
                throw std::runtime_error("tile size mismatch: expected " +
                                         std::to_string(tile.size_px) + ", got " +
                                         std::to_string(img.width) + "x" +
                                         std::to_string(img.height));

            CloudDecision cloud = cloud_filter(img, config.decloud_threshold);
            if (!cloud.keep) {
                outcomes[i] = Outcome::cloud;
                return;
            }

            BinaryMask mask = build_road_mask(tile, config.radius);

            ImageTensor out_img;
            BinaryMask out_mask;
            if (config.geometry == GeometryMode::crop_only) {
                if (tile.size_px < config.crop)
                    throw std::runtime_error("tile smaller than crop target");
                out_img = crop_center(img, config.crop);
                out_mask = crop_center(mask, config.crop);
            } else {
                int factor = tile.size_px / config.crop;
                if (factor < 1) throw std::runtime_error("tile smaller than crop target");
                int pre = config.crop * factor;
                out_img = downsize_box(crop_center(img, pre), factor);
                out_mask = downsize_majority(crop_center(mask, pre), factor);
            }

            switch (config.occlusion) {
                case PrepOcclusion::none: break;
                case PrepOcclusion::context:
                    out_img = occlude(out_img, out_mask, OcclusionMode::context_occluded);
                    break;
                case PrepOcclusion::road:
                    out_img = occlude(out_img, out_mask, OcclusionMode::road_occluded);
                    break;
                case PrepOcclusion::channel_replace:
                    out_img = replace_channel(out_img, out_mask, Channel::B);
                    break;
            }

            std::string image_uri = "images/" + tile.tile_id + ".png";
            std::string mask_uri = "masks/" + tile.tile_id + ".png";
            write_png_rgb8(out_dir / image_uri, out_img);
            write_png_mask(out_dir / mask_uri, out_mask);

            slots[i] = SampleRecord{tile.tile_id, image_uri, mask_uri,
                                    to_string(tile.label), tile.domain, Split::unassigned};
            outcomes[i] = Outcome::ok;
        } catch (const std::exception& e) {
            outcomes[i] = Outcome::error;
            errors[i] = tile.tile_id + ": " + e.what();
        }
    });

    PrepareSummary summary;
    Manifest manifest;
    manifest.label_set = {"major", "minor", "two_track"};
    for (std::size_t i = 0; i < tiles.size(); ++i) {
        switch (outcomes[i]) {
            case Outcome::ok:
                manifest.records.push_back(slots[i]);
                ++summary.prepared;
                break;
            case Outcome::cloud: ++summary.rejected_clouds; break;
            case Outcome::missing:
                ++summary.missing_tiles;
                summary.sample_errors.push_back(errors[i]);
                break;
            case Outcome::error: summary.sample_errors.push_back(errors[i]); break;
        }
    }

    // The worker count cannot affect the artifacts, so it is an execution
    // detail, not data provenance; recording it would break byte-equality
    // of reruns with different parallelism.
    ordered_json config_json = run_config_to_json(config);
    config_json.erase("threads");
    manifest.provenance = ordered_json{{"tool", "roadkit"},
                                       {"stage", "prepare"},
                                       {"config", std::move(config_json)},
                                       {"tiles_dir", tiles_dir.generic_string()},
                                       {"roads_file", roads_file.generic_string()}};
    write_manifest(manifest, out_dir / "manifest.jsonl");
    return summary;
}

std::vector<FeatureVector> load_features(const std::vector<const SampleRecord*>& records,
                                         const std::filesystem::path& manifest_dir, int threads) {
    std::vector<FeatureVector> features(records.size());
    parallel_for(records.size(), threads, [&](std::size_t i) {
        ImageTensor img = read_png_rgb8(resolve_uri(manifest_dir, records[i]->image_uri));
        features[i] = extract_features(img);
    });
    return features;
}

TrainResult train_from_manifest(const Manifest& manifest, const std::filesystem::path& manifest_dir,
                                const TrainConfig& config, int threads) {
    validate_manifest(manifest);
    std::vector<const SampleRecord*> records = manifest.in_split(Split::train);
    if (records.empty()) throw std::runtime_error("manifest has no train split");

    TrainData data;
    data.class_names = manifest.label_set;
    data.features = load_features(records, manifest_dir, threads);
    data.labels.reserve(records.size());
    std::map<std::string, std::size_t> index;
    for (std::size_t c = 0; c < data.class_names.size(); ++c) index[data.class_names[c]] = c;
    for (const auto* r : records) data.labels.push_back(index.at(r->label));

    return train(data, config);
}

EvalOutput evaluate_from_manifest(const ModelParams& params, const Manifest& manifest,
                                  const std::filesystem::path& manifest_dir, Split split,
                                  int threads) {
    validate_manifest(manifest);
    std::vector<const SampleRecord*> records = manifest.in_split(split);
    if (records.empty())
        throw std::runtime_error("manifest has no samples in split '" + to_string(split) + "'");

    std::map<std::string, std::size_t> index;
    for (std::size_t c = 0; c < params.class_names.size(); ++c) index[params.class_names[c]] = c;

    std::vector<FeatureVector> features = load_features(records, manifest_dir, threads);
    std::vector<std::size_t> labels;
    labels.reserve(records.size());
    for (const auto* r : records) {
        auto it = index.find(r->label);
        if (it == index.end())
            throw std::runtime_error("label '" + r->label + "' unknown to the model");
        labels.push_back(it->second);
    }

    EvalOutput out{evaluate(params, features, labels), ""};
    out.report_json = metrics_report_json(out.confusion);
    return out;
}

}  // namespace roadkit
