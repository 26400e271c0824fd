#include "roadkit/synth.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "roadkit/dataset.hpp"
#include "roadkit/parallel.hpp"
#include "roadkit/png_io.hpp"
#include "roadkit/raster.hpp"
#include "roadkit/rng.hpp"

namespace roadkit {

namespace {

using nlohmann::ordered_json;

constexpr int kMinTilePx = 256;
constexpr int kPolylineVertices = 9;

// Road paint per class. Widths are half-widths in pixels of the dilated
// centerline; two-track paints an annulus, leaving the median strip as
// background.
constexpr std::array<int, 3> kMajorColor{205, 205, 205};
constexpr std::array<int, 3> kMinorColor{142, 138, 132};
constexpr std::array<int, 3> kTwoTrackColor{120, 110, 96};
constexpr int kMajorHalfWidth = 15;
constexpr int kMinorHalfWidth = 6;
constexpr int kTwoTrackOuter = 8;
constexpr int kTwoTrackInner = 4;  // annulus: inner < distance <= outer, two 4 px ruts

// Background palette shift per class, active only under context
// correlation.
constexpr std::array<int, 3> kShiftMajor{16, -8, -4};
constexpr std::array<int, 3> kShiftMinor{-4, 16, -8};
constexpr std::array<int, 3> kShiftTwoTrack{-8, -4, 16};

std::uint8_t clamp_u8(int v) {
    return static_cast<std::uint8_t>(v < 0 ? 0 : (v > 255 ? 255 : v));
}

const std::array<int, 3>& class_shift(RoadLabel label) {
    switch (label) {
        case RoadLabel::major: return kShiftMajor;
        case RoadLabel::minor: return kShiftMinor;
        case RoadLabel::two_track: return kShiftTwoTrack;
    }
    throw std::logic_error("bad road label");
}

void validate_config(const SynthConfig& config) {
    if (config.tile_px < kMinTilePx)
        throw std::invalid_argument("tile_px must be >= " + std::to_string(kMinTilePx));
    for (const auto& [name, params] : config.domain_params) {
        if (params.noise_amplitude < 0)
            throw std::invalid_argument("noise_amplitude must be >= 0 (domain " + name + ")");
        for (int c : params.base_color)
            if (c < 0 || c > 255)
                throw std::invalid_argument("base_color out of [0,255] (domain " + name + ")");
    }
}

const DomainParams& params_for(const SynthConfig& config, const std::string& domain) {
    auto it = config.domain_params.find(domain);
    if (it == config.domain_params.end())
        throw std::invalid_argument("unknown synth domain: " + domain);
    return it->second;
}

std::string pad5(int v) {
    std::ostringstream out;
    out << std::setw(5) << std::setfill('0') << v;
    return out.str();
}

}  // namespace

SynthConfig SynthConfig::defaults() {
    SynthConfig c;
    c.domain_params["synthA"] = DomainParams{{92, 112, 72}, 10};
    c.domain_params["synthB"] = DomainParams{{150, 128, 96}, 14};
    return c;
}

ordered_json synth_config_to_json(const SynthConfig& c) {
    ordered_json domains = ordered_json::object();
    for (const auto& [name, p] : c.domain_params) {
        domains[name] = ordered_json{{"base_color", p.base_color},
                                     {"noise_amplitude", p.noise_amplitude}};
    }
    return ordered_json{{"tile_px", c.tile_px},
                        {"context_correlation", c.context_correlation},
                        {"seed", c.seed},
                        {"domain_params", domains}};
}

SynthConfig synth_config_from_json(const ordered_json& j, SynthConfig base) {
    if (!j.is_object()) throw std::invalid_argument("synth config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (key == "tile_px") base.tile_px = value.get<int>();
        else if (key == "context_correlation") base.context_correlation = value.get<bool>();
        else if (key == "seed") base.seed = value.get<std::uint64_t>();
        else if (key == "domain_params") {
            for (const auto& [name, p] : value.items()) {
                DomainParams d = base.domain_params.count(name) ? base.domain_params[name]
                                                                : DomainParams{};
                if (p.contains("base_color")) {
                    auto arr = p.at("base_color");
                    if (!arr.is_array() || arr.size() != 3)
                        throw std::invalid_argument("base_color must be [r, g, b]");
                    for (int c = 0; c < 3; ++c) d.base_color[c] = arr[c].get<int>();
                }
                if (p.contains("noise_amplitude")) d.noise_amplitude = p.at("noise_amplitude").get<int>();
                base.domain_params[name] = d;
            }
        } else {
            throw std::invalid_argument("unknown synth config key: " + key);
        }
    }
    validate_config(base);
    return base;
}

SynthTile generate_tile(RoadLabel label, const SynthConfig& config, std::uint64_t tile_seed,
                        const std::string& domain) {
    validate_config(config);
    const DomainParams& dp = params_for(config, domain);
    const int px = config.tile_px;
    const double half = px / 2.0;

    // Centerline: jittered vertices along a random direction; the middle
    // vertex is pinned to the tile center so every crop contains road.
    Rng rng = Rng::keyed(config.seed, "geometry", domain, to_string(label), tile_seed);
    const double theta = rng.next_double() * std::numbers::pi;
    const double dx = std::cos(theta), dy = std::sin(theta);
    const double nx = -dy, ny = dx;
    const double span = 0.8 * px;
    const double jitter = 0.04 * px;

    std::vector<PixelPoint> polyline;
    polyline.reserve(kPolylineVertices);
    const int mid = kPolylineVertices / 2;
    for (int i = 0; i < kPolylineVertices; ++i) {
        double t = -span + 2.0 * span * i / (kPolylineVertices - 1);
        double u = (2.0 * rng.next_double() - 1.0) * jitter;
        if (i == mid) u = 0.0;
        polyline.push_back(PixelPoint{std::round(half + t * dx + u * nx),
                                      std::round(half + t * dy + u * ny)});
    }

    // Road geometry from the rasterized centerline.
    CropRect full{0, 0, px, px};
    std::vector<PixelPair> clipped = clip_points_to_crop(polyline, full);
    BinaryMask center = rasterize_polyline(clipped, px, px);
    BinaryMask paint(px, px);
    BinaryMask hole(px, px);  // two-track median strip
    switch (label) {
        case RoadLabel::major: paint = dilate(center, kMajorHalfWidth); break;
        case RoadLabel::minor: paint = dilate(center, kMinorHalfWidth); break;
        case RoadLabel::two_track:
            paint = dilate(center, kTwoTrackOuter);
            hole = dilate(center, kTwoTrackInner);
            break;
    }

    const std::array<int, 3>& road_color = label == RoadLabel::major   ? kMajorColor
                                           : label == RoadLabel::minor ? kMinorColor
                                                                       : kTwoTrackColor;
    std::array<int, 3> background = dp.base_color;
    if (config.context_correlation) {
        const std::array<int, 3>& shift = class_shift(label);
        for (int c = 0; c < 3; ++c) background[c] += shift[c];
    }

    SynthTile tile;
    tile.label = label;
    tile.polyline = std::move(polyline);
    tile.image = ImageTensor(px, px);
    const std::uint64_t noise_key = combine64(combine64(mix64(config.seed), hash_str("noise")),
                                              combine64(hash_str(domain), tile_seed));
    const int amp = dp.noise_amplitude;
    for (int y = 0; y < px; ++y) {
        for (int x = 0; x < px; ++x) {
            bool on_road = paint.at(x, y) && !hole.at(x, y);
            for (int c = 0; c < 3; ++c) {
                double u = Rng::keyed(noise_key, x, y, c).next_double();
                int nv = static_cast<int>(u * (2 * amp + 1)) - amp;
                int v = on_road ? road_color[c] + nv / 2 : background[c] + nv;
                tile.image.set(x, y, c, clamp_u8(v));
            }
        }
    }
    return tile;
}

ordered_json SynthSummary::to_json() const {
    return ordered_json{{"tiles", tiles}, {"per_class", per_class}, {"domain", domain}};
}

SynthSummary generate_dataset(int n_per_class, const SynthConfig& config, const std::string& domain,
                              const std::filesystem::path& out_dir, int mask_radius, int threads) {
    if (n_per_class < 1) throw std::invalid_argument("n_per_class must be >= 1");
    if (mask_radius < 0) throw std::invalid_argument("mask_radius must be >= 0");
    validate_config(config);
    params_for(config, domain);  // fail early on unknown domain

    const std::array<RoadLabel, 3> classes{RoadLabel::major, RoadLabel::minor,
                                           RoadLabel::two_track};
    std::filesystem::create_directories(out_dir / "tiles");
    std::filesystem::create_directories(out_dir / "masks");

    const std::size_t total = static_cast<std::size_t>(n_per_class) * classes.size();
    std::vector<TileRecord> tiles(total);
    std::vector<SampleRecord> samples(total);

    parallel_for(total, threads, [&](std::size_t g) {
        const RoadLabel label = classes[g / static_cast<std::size_t>(n_per_class)];
        const int i = static_cast<int>(g % static_cast<std::size_t>(n_per_class));
        const std::string sample_id = domain + "-" + to_string(label) + "-" + pad5(i);

        SynthTile tile = generate_tile(label, config, static_cast<std::uint64_t>(i), domain);

        // Spread tile centers on a coarse geographic grid near the equator.
        GeoPoint center = make_geo_point(0.02 * static_cast<double>(g % 9000),
                                         0.02 * static_cast<double>(g / 9000));
        TileGeoref georef = make_tile_georef(center, 300.0, config.tile_px);

        TileRecord rec;
        rec.tile_id = sample_id;
        rec.road_id = sample_id;
        rec.label = label;
        rec.domain = domain;
        rec.center = center;
        rec.size_m = georef.size_m;
        rec.size_px = georef.size_px;
        rec.polyline.reserve(tile.polyline.size());
        for (const auto& p : tile.polyline) rec.polyline.push_back(pixel_to_geo(georef, p));

        write_png_rgb8(out_dir / "tiles" / (sample_id + ".png"), tile.image);
        write_png_mask(out_dir / "masks" / (sample_id + ".png"),
                       build_road_mask(rec, mask_radius));

        tiles[g] = std::move(rec);
        samples[g] = SampleRecord{sample_id, "tiles/" + sample_id + ".png",
                                  "masks/" + sample_id + ".png", to_string(label), domain,
                                  Split::unassigned};
    });

    write_roads_file(tiles, out_dir / "roads.jsonl");

    Manifest manifest;
    manifest.records.assign(samples.begin(), samples.end());
    manifest.label_set = {"major", "minor", "two_track"};
    manifest.provenance = ordered_json{{"tool", "roadkit"},
                                       {"stage", "synth"},
                                       {"domain", domain},
                                       {"n_per_class", n_per_class},
                                       {"mask_radius", mask_radius},
                                       {"config", synth_config_to_json(config)}};
    write_manifest(manifest, out_dir / "manifest.jsonl");

    SynthSummary summary;
    summary.tiles = total;
    summary.per_class = static_cast<std::size_t>(n_per_class);
    summary.domain = domain;
    return summary;
}

}  // namespace roadkit
