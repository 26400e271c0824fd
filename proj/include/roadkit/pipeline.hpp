#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "roadkit/dataset.hpp"
#include "roadkit/geo.hpp"
#include "roadkit/model.hpp"
#include "roadkit/osm_ingest.hpp"

namespace roadkit {

/// One tile to prepare: georeferencing plus the road that defines it.
/// Produced by ingest (and by the synthetic generator), consumed by prepare.
struct TileRecord {
    std::string tile_id;
    std::string road_id;
    RoadLabel label = RoadLabel::minor;
    std::string domain;
    GeoPoint center;
    double size_m = 300.0;
    int size_px = 1000;
    std::vector<GeoPoint> polyline;
};

// JSONL roads file, one TileRecord per line.
void write_roads_file(const std::vector<TileRecord>& tiles, const std::filesystem::path& path);
std::vector<TileRecord> read_roads_file(const std::filesystem::path& path);

enum class PrepOcclusion { none, context, road, channel_replace };
enum class GeometryMode { crop_only, crop_downsize };

std::string to_string(PrepOcclusion v);
PrepOcclusion occlusion_from_string(const std::string& s);
std::string to_string(GeometryMode v);
GeometryMode geometry_from_string(const std::string& s);

/// Pipeline parameters. Defaults are the published values: dilation
/// radius 20, de-cloud threshold 150, crop target 224.
struct RunConfig {
    std::uint64_t seed = 0;
    int radius = 20;
    double decloud_threshold = 150.0;
    int crop = 224;
    PrepOcclusion occlusion = PrepOcclusion::none;
    GeometryMode geometry = GeometryMode::crop_only;
    std::string domain;
    int points_per_road = 1;
    int threads = 1;
};

nlohmann::ordered_json run_config_to_json(const RunConfig& c);
RunConfig run_config_from_json(const nlohmann::ordered_json& j, RunConfig base = {});

struct IngestSummary {
    std::size_t roads = 0;
    std::size_t tiles = 0;
    std::size_t skipped_unmappable = 0;
    std::size_t skipped_short = 0;
    std::size_t skipped_not_road = 0;
    std::size_t clamped_roads = 0;  // fewer vertices than points_per_road
    ClassDistribution distribution;

    nlohmann::ordered_json to_json() const;
};

/// Parse a GeoJSON extract, sample anchors per road, persist tile records.
IngestSummary run_ingest(const std::filesystem::path& geojson_path, const std::string& domain,
                         const RunConfig& config, const std::filesystem::path& roads_out,
                         const std::optional<std::filesystem::path>& class_map_path = std::nullopt);

struct PrepareSummary {
    std::size_t prepared = 0;
    std::size_t rejected_clouds = 0;
    std::size_t missing_tiles = 0;
    std::vector<std::string> sample_errors;

    nlohmann::ordered_json to_json() const;
};

/// Per tile: de-cloud at full resolution, rasterize + dilate the road mask
/// at full resolution, crop image and mask to the target, apply the
/// occlusion variant, write PNGs and the manifest under out_dir.
PrepareSummary prepare_dataset(const std::filesystem::path& tiles_dir,
                               const std::filesystem::path& roads_file,
                               const std::filesystem::path& out_dir, const RunConfig& config);

/// Builds the full-resolution road mask for one tile: project the polyline,
/// clip to the tile, rasterize, dilate.
BinaryMask build_road_mask(const TileRecord& tile, int radius);

/// Loads images for the given records (URIs relative to manifest_dir) and
/// extracts features, in record order; parallel across samples.
std::vector<FeatureVector> load_features(const std::vector<const SampleRecord*>& records,
                                         const std::filesystem::path& manifest_dir, int threads);

struct EvalOutput {
    ConfusionMatrix confusion;
    std::string report_json;
};

TrainResult train_from_manifest(const Manifest& manifest, const std::filesystem::path& manifest_dir,
                                const TrainConfig& config, int threads);

EvalOutput evaluate_from_manifest(const ModelParams& params, const Manifest& manifest,
                                  const std::filesystem::path& manifest_dir, Split split,
                                  int threads);

}  // namespace roadkit
