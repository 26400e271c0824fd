#include "roadkit/experiments.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include "roadkit/imageops.hpp"
#include "roadkit/metrics.hpp"
#include "roadkit/parallel.hpp"
#include "roadkit/png_io.hpp"

namespace roadkit {

namespace {

using nlohmann::ordered_json;

/// Features for every record, keyed by sample_id, loaded once so the
/// harness rows can reuse them.
std::map<std::string, FeatureVector> load_feature_table(const Manifest& m,
                                                        const std::filesystem::path& manifest_dir,
                                                        int threads) {
    std::vector<const SampleRecord*> all;
    all.reserve(m.records.size());
    for (const auto& r : m.records) all.push_back(&r);
    std::vector<FeatureVector> features = load_features(all, manifest_dir, threads);
    std::map<std::string, FeatureVector> table;
    for (std::size_t i = 0; i < all.size(); ++i) table[all[i]->sample_id] = features[i];
    return table;
}

TrainData gather(const Manifest& m, Split split, const std::vector<std::string>& class_names,
                 const std::map<std::string, FeatureVector>& table) {
    std::map<std::string, std::size_t> index;
    for (std::size_t c = 0; c < class_names.size(); ++c) index[class_names[c]] = c;

    TrainData data;
    data.class_names = class_names;
    for (const auto* r : m.in_split(split)) {
        auto feat = table.find(r->sample_id);
        if (feat == table.end())
            throw std::runtime_error("no features for sample " + r->sample_id);
        auto cls = index.find(r->label);
        if (cls == index.end()) throw std::runtime_error("label '" + r->label + "' not in class set");
        data.features.push_back(feat->second);
        data.labels.push_back(cls->second);
    }
    return data;
}

ModelParams train_rows(const Manifest& m, const std::map<std::string, FeatureVector>& table,
                       const TrainConfig& cfg) {
    TrainData data = gather(m, Split::train, m.label_set, table);
    if (data.features.empty()) throw std::runtime_error("train split is empty");
    return train(data, cfg).params;
}

ConfusionMatrix eval_rows(const ModelParams& params, const Manifest& m, Split split,
                          const std::map<std::string, FeatureVector>& table) {
    TrainData data = gather(m, split, params.class_names, table);
    if (data.features.empty())
        throw std::runtime_error("split '" + to_string(split) + "' is empty");
    return evaluate(params, data.features, data.labels);
}

/// Manifest with URIs resolved against its directory, so records from
/// different files can be merged.
Manifest read_manifest_absolute(const std::filesystem::path& path) {
    Manifest m = read_manifest(path);
    std::filesystem::path dir = std::filesystem::absolute(path).parent_path();
    for (auto& r : m.records) {
        if (!std::filesystem::path(r.image_uri).is_absolute())
            r.image_uri = (dir / r.image_uri).generic_string();
        if (!r.mask_uri.empty() && !std::filesystem::path(r.mask_uri).is_absolute())
            r.mask_uri = (dir / r.mask_uri).generic_string();
    }
    return m;
}

std::vector<std::string> png_stems(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir))
        throw std::runtime_error("not a directory: " + dir.string());
    std::vector<std::string> stems;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".png")
            stems.push_back(entry.path().stem().string());
    std::sort(stems.begin(), stems.end());
    return stems;
}

}  // namespace

ordered_json run_masking_experiment(const std::filesystem::path& tiles_dir,
                                    const std::filesystem::path& roads_file,
                                    const std::filesystem::path& workdir,
                                    const ExperimentConfig& cfg) {
    const std::array<PrepOcclusion, 4> modes{PrepOcclusion::none, PrepOcclusion::context,
                                             PrepOcclusion::road, PrepOcclusion::channel_replace};
    ordered_json rows = ordered_json::array();
    for (PrepOcclusion mode : modes) {
        RunConfig rc = cfg.run;
        rc.occlusion = mode;
        std::filesystem::path prep_dir = workdir / ("prep_" + to_string(mode));
        prepare_dataset(tiles_dir, roads_file, prep_dir, rc);

        Manifest m = read_manifest(prep_dir / "manifest.jsonl");
        m = split_manifest(m, cfg.fractions, cfg.run.seed);
        TrainResult tr = train_from_manifest(m, prep_dir, cfg.train, cfg.run.threads);
        EvalOutput ev = evaluate_from_manifest(tr.params, m, prep_dir, Split::val, cfg.run.threads);

        rows.push_back(ordered_json{{"masking", to_string(mode)},
                                    {"unweighted_accuracy", unweighted_accuracy(ev.confusion)},
                                    {"f1", macro_f1(ev.confusion)}});
    }
    return ordered_json{{"experiment", "masking"}, {"rows", rows}};
}

const std::vector<BinarizeRow>& binarize_rows() {
    static const std::vector<BinarizeRow> rows{
        {"minor", {"major", "two_track"}, false},
        {"minor", {"two_track"}, true},
        {"minor", {"major"}, true},
        {"major", {"minor", "two_track"}, true},
        {"major", {"two_track"}, true},
    };
    return rows;
}

Manifest binarize_row_manifest(const Manifest& m, const BinarizeRow& row, std::uint64_t seed) {
    Manifest b = binarize_labels(m, row.isolated, row.alternates);
    if (row.rebalance) {
        std::int64_t per = -1;
        for (const auto& [label, n] : b.class_counts()) {
            if (n == 0)
                throw std::runtime_error("class '" + label + "' absent after binarization");
            per = per < 0 ? n : std::min(per, n);
        }
        b = balance_subset(b, per, seed);
    }
    return b;
}

ordered_json run_binarize_experiment(const std::filesystem::path& manifest_path,
                                     const ExperimentConfig& cfg) {
    Manifest base = read_manifest(manifest_path);
    std::filesystem::path dir = manifest_path.parent_path();
    auto table = load_feature_table(base, dir, cfg.run.threads);

    ordered_json rows = ordered_json::array();
    for (const BinarizeRow& row : binarize_rows()) {
        Manifest bm = binarize_row_manifest(base, row, cfg.run.seed);
        bm = split_manifest(bm, cfg.fractions, cfg.run.seed);
        ModelParams model = train_rows(bm, table, cfg.train);
        ConfusionMatrix cm = eval_rows(model, bm, Split::val, table);
        rows.push_back(ordered_json{{"isolated_class", row.isolated},
                                    {"alternate_classes", row.alternates},
                                    {"n", bm.records.size()},
                                    {"accuracy", unweighted_accuracy(cm)}});
    }
    return ordered_json{{"experiment", "binarize"}, {"rows", rows}};
}

ordered_json run_cross_domain_experiment(const std::vector<std::filesystem::path>& manifest_paths,
                                         const std::string& domain_a, const std::string& domain_b,
                                         const ExperimentConfig& cfg) {
    if (manifest_paths.empty()) throw std::invalid_argument("cross_domain needs a manifest");
    if (domain_a == domain_b) throw std::invalid_argument("cross_domain needs two distinct domains");

    Manifest merged;
    for (std::size_t i = 0; i < manifest_paths.size(); ++i) {
        Manifest m = read_manifest_absolute(manifest_paths[i]);
        if (i == 0) {
            merged = std::move(m);
        } else {
            if (m.label_set != merged.label_set)
                throw std::runtime_error("manifests disagree on label_set");
            merged.records.insert(merged.records.end(), m.records.begin(), m.records.end());
        }
    }
    validate_manifest(merged);

    std::map<std::string, Manifest> parts;
    for (const std::string& dom : {domain_a, domain_b}) {
        Manifest part = filter_domain(merged, dom);
        if (part.records.empty())
            throw std::runtime_error("domain absent from manifest: " + dom);
        parts[dom] = split_manifest(part, cfg.fractions, cfg.run.seed);
    }

    auto table = load_feature_table(merged, "", cfg.run.threads);
    std::map<std::string, ModelParams> models;
    for (const std::string& dom : {domain_a, domain_b})
        models[dom] = train_rows(parts[dom], table, cfg.train);

    ordered_json rows = ordered_json::array();
    ordered_json in_domain = ordered_json::array();
    ordered_json reports = ordered_json::array();
    for (const auto& [train_dom, test_dom] :
         std::vector<std::pair<std::string, std::string>>{{domain_a, domain_b},
                                                          {domain_b, domain_a}}) {
        ConfusionMatrix cm_in = eval_rows(models[train_dom], parts[train_dom], Split::val, table);
        ConfusionMatrix cm_cross = eval_rows(models[train_dom], parts[test_dom], Split::val, table);

        rows.push_back(ordered_json{{"training_domain", train_dom},
                                    {"test_domain", test_dom},
                                    {"balanced_accuracy", balanced_accuracy(cm_cross)}});
        in_domain.push_back(ordered_json{{"training_domain", train_dom},
                                         {"test_domain", train_dom},
                                         {"balanced_accuracy", balanced_accuracy(cm_in)}});
        reports.push_back(ordered_json{
            {"training_domain", train_dom},
            {"test_domain", test_dom},
            {"report", ordered_json::parse(metrics_report_json(cm_cross))}});
        reports.push_back(ordered_json{
            {"training_domain", train_dom},
            {"test_domain", train_dom},
            {"report", ordered_json::parse(metrics_report_json(cm_in))}});
    }
    return ordered_json{{"experiment", "cross_domain"},
                        {"rows", rows},
                        {"in_domain", in_domain},
                        {"reports", reports}};
}

ordered_json run_baseline_experiment(const std::filesystem::path& manifest_path,
                                     const ExperimentConfig& cfg) {
    Manifest base = read_manifest(manifest_path);
    std::filesystem::path dir = manifest_path.parent_path();
    if (!cfg.run.domain.empty()) {
        base = filter_domain(base, cfg.run.domain);
        if (base.records.empty())
            throw std::runtime_error("domain absent from manifest: " + cfg.run.domain);
    }

    std::vector<std::string> domains;  // first-appearance order
    for (const auto& r : base.records)
        if (std::find(domains.begin(), domains.end(), r.domain) == domains.end())
            domains.push_back(r.domain);

    auto table = load_feature_table(base, dir, cfg.run.threads);
    ordered_json rows = ordered_json::array();
    for (const std::string& dom : domains) {
        Manifest part = split_manifest(filter_domain(base, dom), cfg.fractions, cfg.run.seed);
        ModelParams model = train_rows(part, table, cfg.train);
        ConfusionMatrix cm = eval_rows(model, part, Split::val, table);
        rows.push_back(ordered_json{{"domain", dom},
                                    {"unweighted_accuracy", unweighted_accuracy(cm)},
                                    {"f1", macro_f1(cm)}});
    }
    return ordered_json{{"experiment", "baseline"}, {"rows", rows}};
}

ordered_json run_iou_report(const std::filesystem::path& pred_dir,
                            const std::filesystem::path& ref_dir, std::vector<double> thresholds,
                            const std::optional<std::filesystem::path>& manifest_path) {
    if (thresholds.empty()) thresholds.push_back(0.5);

    std::vector<std::string> pred = png_stems(pred_dir);
    std::vector<std::string> ref = png_stems(ref_dir);
    std::vector<std::string> paired, pred_only, ref_only;
    std::set_intersection(pred.begin(), pred.end(), ref.begin(), ref.end(),
                          std::back_inserter(paired));
    std::set_difference(pred.begin(), pred.end(), ref.begin(), ref.end(),
                        std::back_inserter(pred_only));
    std::set_difference(ref.begin(), ref.end(), pred.begin(), pred.end(),
                        std::back_inserter(ref_only));

    std::map<std::string, std::string> class_of;
    if (manifest_path) {
        Manifest m = read_manifest(*manifest_path);
        for (const auto& r : m.records) class_of[r.sample_id] = r.label;
    }

    std::vector<ConfidenceMap> confidences(paired.size());
    std::vector<BinaryMask> references(paired.size());
    for (std::size_t i = 0; i < paired.size(); ++i) {
        confidences[i] = read_png_confidence(pred_dir / (paired[i] + ".png"));
        references[i] = read_png_mask(ref_dir / (paired[i] + ".png"));
        if (confidences[i].width != references[i].width ||
            confidences[i].height != references[i].height)
            throw std::runtime_error("size mismatch for sample " + paired[i]);
    }

    ordered_json results = ordered_json::array();
    for (double t : thresholds) {
        double iou_sum = 0.0;
        std::size_t degenerate = 0;
        std::map<std::string, std::pair<std::int64_t, std::int64_t>> per_class;  // ge_05, total
        ordered_json per_sample = ordered_json::array();
        for (std::size_t i = 0; i < paired.size(); ++i) {
            BinaryMask predicted = binarize_confidence(confidences[i], t);
            IouResult r = iou(predicted, references[i]);
            iou_sum += r.value;
            if (r.degenerate) ++degenerate;
            auto found = class_of.find(paired[i]);
            std::string cls = found != class_of.end() ? found->second : "all";
            auto& [ge, total] = per_class[cls];
            if (r.value >= 0.5) ++ge;
            ++total;
            per_sample.push_back(ordered_json{
                {"sample_id", paired[i]}, {"class", cls}, {"iou", r.value}});
        }
        ordered_json fractions = ordered_json::object();
        for (const auto& [cls, counts] : per_class)
            fractions[cls] = static_cast<double>(counts.first) / static_cast<double>(counts.second);
        results.push_back(ordered_json{
            {"threshold", t},
            {"mean_iou", paired.empty() ? ordered_json(nullptr)
                                        : ordered_json(iou_sum / static_cast<double>(paired.size()))},
            {"fraction_iou_ge_05", fractions},
            {"degenerate", degenerate},
            {"per_sample", per_sample}});
    }

    return ordered_json{{"experiment", "iou"},
                        {"paired", paired.size()},
                        {"unpaired", ordered_json{{"predicted_only", pred_only},
                                                  {"reference_only", ref_only}}},
                        {"results", results}};
}

}  // namespace roadkit
