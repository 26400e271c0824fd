#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "roadkit/experiments.hpp"
#include "roadkit/png_io.hpp"
#include "roadkit/synth.hpp"
#include "test_support.hpp"

using namespace roadkit;
using namespace test_support;

namespace {

Manifest balanced_three_class(int per_class) {
    Manifest m;
    m.label_set = {"major", "minor", "two_track"};
    for (const auto& label : m.label_set)
        for (int i = 0; i < per_class; ++i) {
            SampleRecord r;
            r.sample_id = label + "-" + std::to_string(i);
            r.image_uri = "images/" + r.sample_id + ".png";
            r.label = label;
            r.domain = "synthA";
            m.records.push_back(r);
        }
    return m;
}

}  // namespace

TEST_CASE("the published binarization rows are pinned") {
    const auto& rows = binarize_rows();
    REQUIRE(rows.size() == 5);

    CHECK(rows[0].isolated == "minor");
    CHECK(rows[0].alternates == std::vector<std::string>{"major", "two_track"});
    CHECK_FALSE(rows[0].rebalance);

    CHECK(rows[1].isolated == "minor");
    CHECK(rows[1].alternates == std::vector<std::string>{"two_track"});
    CHECK(rows[1].rebalance);

    CHECK(rows[2].isolated == "minor");
    CHECK(rows[2].alternates == std::vector<std::string>{"major"});
    CHECK(rows[2].rebalance);

    CHECK(rows[3].isolated == "major");
    CHECK(rows[3].alternates == std::vector<std::string>{"minor", "two_track"});
    CHECK(rows[3].rebalance);

    CHECK(rows[4].isolated == "major");
    CHECK(rows[4].alternates == std::vector<std::string>{"two_track"});
    CHECK(rows[4].rebalance);
}

TEST_CASE("binarize_row_manifest reproduces the published sample counts") {
    // 5000 per class, as in the source inventory.
    Manifest m = balanced_three_class(5000);
    const auto& rows = binarize_rows();
    const std::vector<std::size_t> expected_n = {15000, 10000, 10000, 10000, 10000};
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CAPTURE(i);
        Manifest out = binarize_row_manifest(m, rows[i], 1);
        CHECK(out.records.size() == expected_n[i]);
        CHECK(out.label_set == std::vector<std::string>{"isolated", "other"});
        auto counts = out.class_counts();
        if (rows[i].rebalance) {
            CHECK(counts["isolated"] == counts["other"]);
        } else {
            CHECK(counts["isolated"] == 5000);
            CHECK(counts["other"] == 10000);
        }
    }
}

TEST_CASE("rebalance subsamples to the minority side deterministically") {
    Manifest m = balanced_three_class(40);
    BinarizeRow row{"major", {"minor", "two_track"}, true};
    // isolated: 40 major; other: 80 -> balanced at 40 each.
    Manifest out = binarize_row_manifest(m, row, 7);
    auto counts = out.class_counts();
    CHECK(counts["isolated"] == 40);
    CHECK(counts["other"] == 40);
    CHECK(out.records.size() == 80);

    Manifest again = binarize_row_manifest(m, row, 7);
    CHECK(again.records == out.records);
    Manifest other_seed = binarize_row_manifest(m, row, 8);
    CHECK(other_seed.records != out.records);

    // A class absent from the input is an error, not an empty row.
    Manifest two_only;
    two_only.label_set = {"major", "minor"};
    for (int i = 0; i < 4; ++i) {
        SampleRecord r;
        r.sample_id = "m-" + std::to_string(i);
        r.label = i % 2 ? "major" : "minor";
        two_only.records.push_back(r);
    }
    BinarizeRow needs_two_track{"minor", {"two_track"}, true};
    CHECK_THROWS_AS(binarize_row_manifest(two_only, needs_two_track, 1), std::exception);
}

TEST_CASE("iou report pairs stems, sweeps thresholds, and counts strays") {
    TempDir tmp("iou");
    const auto pred = tmp.path / "pred";
    const auto ref = tmp.path / "ref";
    std::filesystem::create_directories(pred);
    std::filesystem::create_directories(ref);

    // Sample 1: perfect match at any threshold.
    BinaryMask square(32, 32);
    for (int y = 8; y < 24; ++y)
        for (int x = 8; x < 24; ++x) square.set(x, y, 1);
    ConfidenceMap conf1(32, 32);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) conf1.set(x, y, square.at(x, y) ? 0.9f : 0.1f);
    write_png_confidence(pred / "sample-a.png", conf1);
    write_png_mask(ref / "sample-a.png", square);

    // Sample 2: prediction confidence 0.4 everywhere the mask is set;
    // a 0.5 threshold wipes it out, a 0.3 threshold recovers it.
    ConfidenceMap conf2(32, 32);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) conf2.set(x, y, square.at(x, y) ? 0.4f : 0.0f);
    write_png_confidence(pred / "sample-b.png", conf2);
    write_png_mask(ref / "sample-b.png", square);

    // Strays on both sides.
    write_png_confidence(pred / "only-pred.png", conf1);
    write_png_mask(ref / "only-ref.png", square);

    auto report = run_iou_report(pred, ref, {0.5, 0.3}, std::nullopt);
    CHECK(report["experiment"] == "iou");
    CHECK(report["paired"] == 2);
    CHECK(report["unpaired"]["predicted_only"].size() == 1);
    CHECK(report["unpaired"]["predicted_only"][0] == "only-pred");
    CHECK(report["unpaired"]["reference_only"][0] == "only-ref");

    REQUIRE(report["results"].size() == 2);
    const auto& at_half = report["results"][0];
    CHECK(at_half["threshold"].get<double>() == doctest::Approx(0.5));
    CHECK(at_half["mean_iou"].get<double>() == doctest::Approx(0.5));  // (1.0 + 0.0) / 2
    REQUIRE(at_half["per_sample"].size() == 2);
    CHECK(at_half["per_sample"][0]["sample_id"] == "sample-a");
    CHECK(at_half["per_sample"][0]["iou"].get<double>() == doctest::Approx(1.0));
    CHECK(at_half["per_sample"][1]["iou"].get<double>() == doctest::Approx(0.0));

    const auto& at_03 = report["results"][1];
    CHECK(at_03["mean_iou"].get<double>() == doctest::Approx(1.0));

    // Empty intersection of stems: mean is null, not zero.
    const auto lonely = tmp.path / "lonely";
    std::filesystem::create_directories(lonely);
    write_png_mask(lonely / "zzz.png", square);
    auto none = run_iou_report(pred, lonely, {0.5}, std::nullopt);
    CHECK(none["paired"] == 0);
    CHECK(none["results"][0]["mean_iou"].is_null());
}

TEST_CASE("iou report draws class names from a manifest when given") {
    TempDir tmp("iou-manifest");
    const auto pred = tmp.path / "pred";
    const auto ref = tmp.path / "ref";
    std::filesystem::create_directories(pred);
    std::filesystem::create_directories(ref);

    BinaryMask blob(16, 16);
    for (int y = 4; y < 12; ++y)
        for (int x = 4; x < 12; ++x) blob.set(x, y, 1);
    ConfidenceMap good(16, 16);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) good.set(x, y, blob.at(x, y) ? 1.0f : 0.0f);
    ConfidenceMap bad(16, 16);  // all zero: IoU 0 against blob

    write_png_confidence(pred / "s1.png", good);
    write_png_mask(ref / "s1.png", blob);
    write_png_confidence(pred / "s2.png", bad);
    write_png_mask(ref / "s2.png", blob);

    Manifest m;
    m.label_set = {"major", "minor"};
    SampleRecord r1;
    r1.sample_id = "s1";
    r1.label = "major";
    SampleRecord r2;
    r2.sample_id = "s2";
    r2.label = "minor";
    m.records = {r1, r2};
    write_manifest(m, tmp.path / "manifest.jsonl");

    auto report = run_iou_report(pred, ref, {0.5}, tmp.path / "manifest.jsonl");
    const auto& res = report["results"][0];
    CHECK(res["per_sample"][0]["class"] == "major");
    CHECK(res["per_sample"][1]["class"] == "minor");
    // Per-class hit fractions at the 0.5 quality bar.
    CHECK(res["fraction_iou_ge_05"]["major"].get<double>() == doctest::Approx(1.0));
    CHECK(res["fraction_iou_ge_05"]["minor"].get<double>() == doctest::Approx(0.0));
}

TEST_CASE("baseline experiment reports one row per domain") {
    TempDir tmp("baseline");
    SynthConfig cfg = SynthConfig::defaults();
    cfg.tile_px = 256;
    generate_dataset(6, cfg, "synthA", tmp.path / "a", 20, 1);

    RunConfig rc;
    rc.crop = 96;
    prepare_dataset(tmp.path / "a" / "tiles", tmp.path / "a" / "roads.jsonl", tmp.path / "prep",
                    rc);

    ExperimentConfig ec;
    ec.train.epochs = 40;
    ec.train.learning_rate = 0.02;
    ec.train.batch_size = 8;
    ec.fractions = {0.75, 0.25, 0.0};

    auto report = run_baseline_experiment(tmp.path / "prep" / "manifest.jsonl", ec);
    CHECK(report["experiment"] == "baseline");
    REQUIRE(report["rows"].size() == 1);
    CHECK(report["rows"][0]["domain"] == "synthA");
    CHECK(report["rows"][0]["unweighted_accuracy"].get<double>() >= 0.0);
    CHECK(report["rows"][0]["f1"].get<double>() <= 1.0);

    // Filtering to an absent domain is an error.
    ExperimentConfig missing = ec;
    missing.run.domain = "mars";
    CHECK_THROWS_AS(run_baseline_experiment(tmp.path / "prep" / "manifest.jsonl", missing),
                    std::exception);
}
