#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "roadkit/imageops.hpp"
#include "roadkit/osm_ingest.hpp"
#include "roadkit/pipeline.hpp"

namespace roadkit {

/// Background texture of one synthetic domain.
struct DomainParams {
    std::array<int, 3> base_color{100, 100, 100};  // RGB
    int noise_amplitude = 10;                      // uniform +/- amplitude per pixel
};

/// Generator parameters. Two domains ("synthA", "synthB") with distinct
/// palettes are predefined; both can be overridden per config.
struct SynthConfig {
    int tile_px = 1000;  // >= 256
    bool context_correlation = false;
    std::map<std::string, DomainParams> domain_params;
    std::uint64_t seed = 0;

    static SynthConfig defaults();
};

nlohmann::ordered_json synth_config_to_json(const SynthConfig& c);
SynthConfig synth_config_from_json(const nlohmann::ordered_json& j, SynthConfig base);

struct SynthTile {
    ImageTensor image;
    std::vector<PixelPoint> polyline;  // centerline vertices, pixel coordinates
    RoadLabel label = RoadLabel::minor;
};

/// Renders one tile: a jittered road polyline through the tile center over
/// a noisy domain background. Class decides road geometry and paint; with
/// context_correlation the background palette also shifts per class.
/// Deterministic in (config, domain, label, tile_seed).
SynthTile generate_tile(RoadLabel label, const SynthConfig& config, std::uint64_t tile_seed,
                        const std::string& domain);

struct SynthSummary {
    std::size_t tiles = 0;
    std::size_t per_class = 0;
    std::string domain;

    nlohmann::ordered_json to_json() const;
};

/// Writes a class-balanced dataset under out_dir: tiles/<id>.png,
/// masks/<id>.png (rasterized + dilated ground truth), roads.jsonl and
/// manifest.jsonl, schema-identical to the ingest/prepare artifacts.
SynthSummary generate_dataset(int n_per_class, const SynthConfig& config, const std::string& domain,
                              const std::filesystem::path& out_dir, int mask_radius = 20,
                              int threads = 1);

}  // namespace roadkit
