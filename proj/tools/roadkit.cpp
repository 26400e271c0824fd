#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "roadkit/dataset.hpp"
#include "roadkit/experiments.hpp"
#include "roadkit/metrics.hpp"
#include "roadkit/model.hpp"
#include "roadkit/pipeline.hpp"
#include "roadkit/synth.hpp"

// Exit codes: 0 success, 1 usage error, 2 data error.
// Machine-readable JSON summaries go to stdout, diagnostics to stderr.

namespace {

using nlohmann::ordered_json;
using namespace roadkit;

ordered_json load_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    try {
        return ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("config file " + path + ": " + e.what());
    }
}

void emit(const ordered_json& summary) { std::cout << summary.dump(2) << '\n'; }

/// The shared pipeline flags. A --config JSON file provides base values;
/// flags given on the command line override it.
struct SharedOpts {
    std::string config_path;
    std::uint64_t seed = 0;
    int radius = 20;
    double decloud = 150.0;
    int crop = 224;
    std::string occlusion = "none";
    std::string geometry = "crop";
    std::string domain;
    int points_per_road = 1;
    int threads = 1;

    void attach(CLI::App* cmd, bool with_domain) {
        cmd->add_option("--config", config_path, "JSON config file; flags override its values");
        cmd->add_option("--seed", seed, "global random seed");
        cmd->add_option("--radius", radius, "mask dilation radius in pixels");
        cmd->add_option("--decloud-threshold", decloud, "cloud rejection band-mean threshold");
        cmd->add_option("--crop", crop, "crop target in pixels");
        cmd->add_option("--occlusion", occlusion, "occlusion variant")
            ->check(CLI::IsMember({"none", "context", "road", "channel-replace"}));
        cmd->add_option("--geometry", geometry, "geometry mode")
            ->check(CLI::IsMember({"crop", "crop-downsize"}));
        if (with_domain) cmd->add_option("--domain", domain, "domain name");
        cmd->add_option("--points-per-road", points_per_road, "anchor points sampled per road");
        cmd->add_option("--threads", threads, "worker threads");
    }

    RunConfig resolve(const CLI::App* cmd) const {
        RunConfig rc;
        if (!config_path.empty()) rc = run_config_from_json(load_json_file(config_path), rc);
        if (cmd->count("--seed")) rc.seed = seed;
        if (cmd->count("--radius")) rc.radius = radius;
        if (cmd->count("--decloud-threshold")) rc.decloud_threshold = decloud;
        if (cmd->count("--crop")) rc.crop = crop;
        if (cmd->count("--occlusion")) rc.occlusion = occlusion_from_string(occlusion);
        if (cmd->count("--geometry")) rc.geometry = geometry_from_string(geometry);
        if (cmd->get_option_no_throw("--domain") && cmd->count("--domain")) rc.domain = domain;
        if (cmd->count("--points-per-road")) rc.points_per_road = points_per_road;
        if (cmd->count("--threads")) rc.threads = threads;
        return run_config_from_json(ordered_json::object(), rc);  // revalidate
    }
};

struct TrainOpts {
    int epochs = TrainConfig{}.epochs;
    double learning_rate = TrainConfig{}.learning_rate;
    int batch_size = TrainConfig{}.batch_size;

    void attach(CLI::App* cmd) {
        cmd->add_option("--epochs", epochs, "training epochs");
        cmd->add_option("--learning-rate", learning_rate, "Adam learning rate");
        cmd->add_option("--batch-size", batch_size, "mini-batch size");
    }

    TrainConfig resolve(std::uint64_t seed) const {
        TrainConfig tc;
        tc.epochs = epochs;
        tc.learning_rate = learning_rate;
        tc.batch_size = batch_size;
        tc.seed = seed;
        if (tc.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
        if (tc.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
        if (!(tc.learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
        return tc;
    }
};

std::map<std::string, std::int64_t> split_counts(const Manifest& m) {
    std::map<std::string, std::int64_t> counts;
    for (const auto& r : m.records) ++counts[to_string(r.split)];
    return counts;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"road classification dataset toolkit"};
    app.require_subcommand(1);

    // ingest
    auto* ingest = app.add_subcommand("ingest", "parse GeoJSON roads into tile records");
    std::string in_geojson, in_out, in_class_map;
    ingest->add_option("--geojson", in_geojson, "GeoJSON FeatureCollection")
        ->required()
        ->check(CLI::ExistingFile);
    ingest->add_option("--out", in_out, "output roads JSONL")->required();
    ingest->add_option("--class-map", in_class_map, "JSON {highway tag: class} replacement table")
        ->check(CLI::ExistingFile);
    SharedOpts ingest_shared;
    ingest_shared.attach(ingest, true);
    ingest->callback([&] {
        RunConfig rc = ingest_shared.resolve(ingest);
        if (rc.domain.empty()) throw std::invalid_argument("ingest requires --domain");
        std::optional<std::filesystem::path> class_map;
        if (!in_class_map.empty()) class_map = in_class_map;
        IngestSummary summary = run_ingest(in_geojson, rc.domain, rc, in_out, class_map);
        emit(summary.to_json());
    });

    // prepare
    auto* prepare = app.add_subcommand("prepare", "build labeled image/mask dataset from tiles");
    std::string pr_tiles, pr_roads, pr_out;
    prepare->add_option("--tiles", pr_tiles, "directory of <tile_id>.png images")
        ->required()
        ->check(CLI::ExistingDirectory);
    prepare->add_option("--roads", pr_roads, "roads JSONL from ingest")
        ->required()
        ->check(CLI::ExistingFile);
    prepare->add_option("--out", pr_out, "output dataset directory")->required();
    SharedOpts prepare_shared;
    prepare_shared.attach(prepare, false);
    prepare->callback([&] {
        RunConfig rc = prepare_shared.resolve(prepare);
        PrepareSummary summary = prepare_dataset(pr_tiles, pr_roads, pr_out, rc);
        for (const auto& e : summary.sample_errors) std::cerr << "prepare: " << e << '\n';
        ordered_json out = summary.to_json();
        out["manifest"] = (std::filesystem::path(pr_out) / "manifest.jsonl").generic_string();
        emit(out);
        if (summary.prepared == 0) throw std::runtime_error("no samples prepared");
    });

    // split
    auto* split = app.add_subcommand("split", "assign stratified train/val/test splits");
    std::string sp_manifest, sp_out;
    SplitFractions sp_fractions{};
    split->add_option("--manifest", sp_manifest, "manifest JSONL")
        ->required()
        ->check(CLI::ExistingFile);
    split->add_option("--out", sp_out, "output manifest (default: in place)");
    split->add_option("--train", sp_fractions.train, "train fraction");
    split->add_option("--val", sp_fractions.val, "val fraction");
    split->add_option("--test", sp_fractions.test, "test fraction");
    SharedOpts split_shared;
    split_shared.attach(split, false);
    split->callback([&] {
        RunConfig rc = split_shared.resolve(split);
        Manifest m = read_manifest(sp_manifest);
        m = split_manifest(m, sp_fractions, rc.seed);
        std::string out_path = sp_out.empty() ? sp_manifest : sp_out;
        write_manifest(m, out_path);
        emit(ordered_json{{"manifest", out_path}, {"counts", split_counts(m)}});
    });

    // train
    auto* train_cmd = app.add_subcommand("train", "fit the baseline classifier on a manifest");
    std::string tr_manifest, tr_out;
    bool tr_weighted = false;
    train_cmd->add_option("--manifest", tr_manifest, "manifest with a train split")
        ->required()
        ->check(CLI::ExistingFile);
    train_cmd->add_option("--out", tr_out, "output model JSON")->required();
    train_cmd->add_flag("--weighted", tr_weighted,
                        "weight classes by inverse train-split frequency");
    TrainOpts train_opts;
    train_opts.attach(train_cmd);
    SharedOpts train_shared;
    train_shared.attach(train_cmd, false);
    train_cmd->callback([&] {
        RunConfig rc = train_shared.resolve(train_cmd);
        TrainConfig tc = train_opts.resolve(rc.seed);
        Manifest m = read_manifest(tr_manifest);
        if (tr_weighted) {
            Manifest train_part;
            train_part.label_set = m.label_set;
            for (const auto* r : m.in_split(Split::train)) train_part.records.push_back(*r);
            tc.class_weights = class_weights(train_part);
        }
        std::filesystem::path dir = std::filesystem::path(tr_manifest).parent_path();
        TrainResult result = train_from_manifest(m, dir, tc, rc.threads);
        std::ofstream out(tr_out, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open model file for writing: " + tr_out);
        out << model_to_json(result.params) << '\n';
        emit(ordered_json{{"model", tr_out},
                          {"classes", result.params.class_names},
                          {"train_samples", m.in_split(Split::train).size()},
                          {"epochs", tc.epochs},
                          {"final_train_loss", result.params.final_train_loss}});
    });

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a model on a manifest split");
    std::string ev_manifest, ev_model, ev_split = "val";
    eval_cmd->add_option("--manifest", ev_manifest, "manifest JSONL")
        ->required()
        ->check(CLI::ExistingFile);
    eval_cmd->add_option("--model", ev_model, "model JSON from train")
        ->required()
        ->check(CLI::ExistingFile);
    eval_cmd->add_option("--split", ev_split, "split to evaluate")
        ->check(CLI::IsMember({"train", "val", "test"}));
    SharedOpts eval_shared;
    eval_shared.attach(eval_cmd, false);
    eval_cmd->callback([&] {
        RunConfig rc = eval_shared.resolve(eval_cmd);
        std::ifstream in(ev_model, std::ios::binary);
        std::stringstream buf;
        buf << in.rdbuf();
        ModelParams params = model_from_json(buf.str());
        Manifest m = read_manifest(ev_manifest);
        std::filesystem::path dir = std::filesystem::path(ev_manifest).parent_path();
        EvalOutput out =
            evaluate_from_manifest(params, m, dir, split_from_string(ev_split), rc.threads);
        emit(ordered_json::parse(out.report_json));
    });

    // experiment
    auto* exp = app.add_subcommand("experiment", "run a published experiment harness");
    std::string ex_kind, ex_tiles, ex_roads, ex_workdir;
    std::vector<std::string> ex_manifests, ex_domains;
    SplitFractions ex_fractions{};
    exp->add_option("--kind", ex_kind, "masking | binarize | cross_domain | baseline")
        ->required()
        ->check(CLI::IsMember({"masking", "binarize", "cross_domain", "baseline"}));
    exp->add_option("--tiles", ex_tiles, "tile directory (masking)");
    exp->add_option("--roads", ex_roads, "roads JSONL (masking)");
    exp->add_option("--workdir", ex_workdir, "working directory (masking)");
    exp->add_option("--manifest", ex_manifests, "prepared manifest(s)");
    exp->add_option("--domain", ex_domains, "domain name (twice for cross_domain)");
    exp->add_option("--train", ex_fractions.train, "train fraction");
    exp->add_option("--val", ex_fractions.val, "val fraction");
    exp->add_option("--test", ex_fractions.test, "test fraction");
    TrainOpts exp_train;
    exp_train.attach(exp);
    SharedOpts exp_shared;
    exp_shared.attach(exp, false);
    exp->callback([&] {
        ExperimentConfig cfg;
        cfg.run = exp_shared.resolve(exp);
        cfg.train = exp_train.resolve(cfg.run.seed);
        cfg.fractions = ex_fractions;

        ordered_json report;
        if (ex_kind == "masking") {
            if (ex_tiles.empty() || ex_roads.empty() || ex_workdir.empty())
                throw std::invalid_argument("masking requires --tiles, --roads, --workdir");
            report = run_masking_experiment(ex_tiles, ex_roads, ex_workdir, cfg);
        } else if (ex_kind == "binarize") {
            if (ex_manifests.size() != 1)
                throw std::invalid_argument("binarize requires exactly one --manifest");
            report = run_binarize_experiment(ex_manifests[0], cfg);
        } else if (ex_kind == "cross_domain") {
            if (ex_manifests.empty())
                throw std::invalid_argument("cross_domain requires --manifest");
            if (ex_domains.size() != 2)
                throw std::invalid_argument("cross_domain requires --domain twice (A then B)");
            std::vector<std::filesystem::path> paths(ex_manifests.begin(), ex_manifests.end());
            report = run_cross_domain_experiment(paths, ex_domains[0], ex_domains[1], cfg);
        } else {
            if (ex_manifests.size() != 1)
                throw std::invalid_argument("baseline requires exactly one --manifest");
            if (ex_domains.size() > 1)
                throw std::invalid_argument("baseline accepts at most one --domain");
            if (ex_domains.size() == 1) cfg.run.domain = ex_domains[0];
            report = run_baseline_experiment(ex_manifests[0], cfg);
        }
        emit(report);
    });

    // iou
    auto* iou_cmd = app.add_subcommand("iou", "IoU report for predicted vs reference masks");
    std::string io_pred, io_ref, io_manifest;
    std::vector<double> io_thresholds;
    iou_cmd->add_option("--pred", io_pred, "predicted confidence/mask PNGs")
        ->required()
        ->check(CLI::ExistingDirectory);
    iou_cmd->add_option("--ref", io_ref, "reference mask PNGs")
        ->required()
        ->check(CLI::ExistingDirectory);
    iou_cmd->add_option("--threshold", io_thresholds, "confidence threshold(s), default 0.5");
    iou_cmd->add_option("--manifest", io_manifest, "manifest for per-class grouping")
        ->check(CLI::ExistingFile);
    iou_cmd->callback([&] {
        std::optional<std::filesystem::path> manifest;
        if (!io_manifest.empty()) manifest = io_manifest;
        emit(run_iou_report(io_pred, io_ref, io_thresholds, manifest));
    });

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic labeled dataset");
    std::string sy_out, sy_domain = "synthA";
    int sy_per_class = 10;
    int sy_tile_px = SynthConfig{}.tile_px;
    bool sy_correlated = false;
    synth->add_option("--out", sy_out, "output dataset directory")->required();
    synth->add_option("--per-class", sy_per_class, "tiles per class")->required();
    synth->add_option("--tile-px", sy_tile_px, "tile size in pixels (>= 256)");
    synth->add_flag("--correlated", sy_correlated, "correlate background with class");
    SharedOpts synth_shared;
    synth_shared.attach(synth, true);
    synth->callback([&] {
        SynthConfig sc = SynthConfig::defaults();
        if (!synth_shared.config_path.empty())
            sc = synth_config_from_json(load_json_file(synth_shared.config_path), sc);
        if (synth->count("--tile-px")) sc.tile_px = sy_tile_px;
        if (synth->count("--correlated")) sc.context_correlation = sy_correlated;
        if (synth->count("--seed")) sc.seed = synth_shared.seed;
        if (synth->count("--domain")) sy_domain = synth_shared.domain;
        int radius = synth->count("--radius") ? synth_shared.radius : 20;
        int threads = synth->count("--threads") ? synth_shared.threads : 1;
        SynthSummary summary = generate_dataset(sy_per_class, sc, sy_domain, sy_out, radius, threads);
        ordered_json out = summary.to_json();
        out["out"] = sy_out;
        out["manifest"] = (std::filesystem::path(sy_out) / "manifest.jsonl").generic_string();
        emit(out);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
