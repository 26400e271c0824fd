#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <nlohmann/json.hpp>
#include <vector>

#include "frozen_metrics.hpp"
#include "roadkit/metrics.hpp"
#include "roadkit/rng.hpp"

using namespace roadkit;

namespace {

ConfusionMatrix from_counts(const std::vector<std::int64_t>& flat, std::size_t c) {
    return frozen::build(flat, c);
}

}  // namespace

TEST_CASE("frozen confusion matrices reproduce precomputed metrics") {
    const auto& kFrozen = frozen::cases();
    for (std::size_t i = 0; i < kFrozen.size(); ++i) {
        CAPTURE(i);
        const auto& f = kFrozen[i];
        ConfusionMatrix cm = from_counts(f.counts, f.c);
        CHECK(macro_f1(cm) == doctest::Approx(f.macro_f1).epsilon(1e-12));
        CHECK(unweighted_accuracy(cm) == doctest::Approx(f.unweighted_acc).epsilon(1e-12));
        if (std::isnan(f.balanced_acc)) {
            CHECK_THROWS_AS(balanced_accuracy(cm), std::invalid_argument);
        } else {
            CHECK(balanced_accuracy(cm) == doctest::Approx(f.balanced_acc).epsilon(1e-12));
        }
    }
}

TEST_CASE("worked example: TP 8, FP 2, FN 8") {
    ConfusionMatrix cm = from_counts({8, 8, 2, 2}, 2);
    auto scores = precision_recall(cm);
    CHECK(scores[0].precision == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(scores[0].recall == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(scores[0].f1 == doctest::Approx(2.0 * 0.8 * 0.5 / 1.3).epsilon(1e-12));
    CHECK_FALSE(scores[0].precision_degenerate);
    CHECK_FALSE(scores[0].recall_degenerate);
}

TEST_CASE("per-class values on a three-class matrix") {
    ConfusionMatrix cm = from_counts({9, 1, 0, 2, 7, 1, 0, 3, 7}, 3);
    auto s = precision_recall(cm);
    CHECK(s[0].precision == doctest::Approx(0.81818181818181823).epsilon(1e-12));
    CHECK(s[1].precision == doctest::Approx(0.63636363636363635).epsilon(1e-12));
    CHECK(s[2].precision == doctest::Approx(0.875).epsilon(1e-12));
    CHECK(s[0].recall == doctest::Approx(0.90000000000000002).epsilon(1e-12));
    CHECK(s[1].recall == doctest::Approx(0.69999999999999996).epsilon(1e-12));
    CHECK(s[2].recall == doctest::Approx(0.69999999999999996).epsilon(1e-12));
}

TEST_CASE("zero denominators give zero scores with degeneracy flags") {
    // Nothing predicted as class1 and nothing truly class1.
    ConfusionMatrix cm = from_counts({1, 0, 0, 0}, 2);
    auto s = precision_recall(cm);
    CHECK(s[1].precision == 0.0);
    CHECK(s[1].recall == 0.0);
    CHECK(s[1].f1 == 0.0);
    CHECK(s[1].precision_degenerate);
    CHECK(s[1].recall_degenerate);
    CHECK_FALSE(s[0].precision_degenerate);

    // Predicted but never true: only recall is degenerate.
    ConfusionMatrix cm2 = from_counts({1, 1, 0, 0}, 2);
    auto s2 = precision_recall(cm2);
    CHECK(s2[1].recall_degenerate);
    CHECK_FALSE(s2[1].precision_degenerate);
    CHECK(s2[1].precision == 0.0);

    CHECK_THROWS_AS(unweighted_accuracy(ConfusionMatrix({"a", "b"})), std::invalid_argument);
}

TEST_CASE("metrics are invariant under class relabeling and count scaling") {
    const std::vector<std::int64_t> base = {9, 1, 0, 2, 7, 1, 0, 3, 7};
    ConfusionMatrix cm = from_counts(base, 3);

    // sigma = (2, 0, 1): new index sigma[i] holds old class i.
    const std::size_t sigma[3] = {2, 0, 1};
    std::vector<std::int64_t> permuted(9, 0);
    for (std::size_t t = 0; t < 3; ++t)
        for (std::size_t p = 0; p < 3; ++p)
            permuted[sigma[t] * 3 + sigma[p]] = base[t * 3 + p];
    ConfusionMatrix cmp = from_counts(permuted, 3);

    std::vector<std::int64_t> scaled;
    for (auto v : base) scaled.push_back(v * 17);
    ConfusionMatrix cms = from_counts(scaled, 3);

    for (const ConfusionMatrix* other : {&cmp, &cms}) {
        CHECK(macro_f1(*other) == doctest::Approx(macro_f1(cm)).epsilon(1e-12));
        CHECK(unweighted_accuracy(*other) == doctest::Approx(unweighted_accuracy(cm)).epsilon(1e-12));
        CHECK(balanced_accuracy(*other) == doctest::Approx(balanced_accuracy(cm)).epsilon(1e-12));
    }
}

TEST_CASE("label accumulation, lookup, and merge behave like one big tally") {
    ConfusionMatrix a({"minor", "major"});
    a.accumulate("minor", "minor");
    a.accumulate("minor", "major");
    ConfusionMatrix b({"minor", "major"});
    b.accumulate("major", "major");
    b.accumulate("minor", "minor");

    ConfusionMatrix merged({"minor", "major"});
    merged.merge(a);
    merged.merge(b);
    CHECK(merged.count(0, 0) == 2);
    CHECK(merged.count(0, 1) == 1);
    CHECK(merged.count(1, 1) == 1);
    CHECK(merged.total() == 4);
    CHECK(merged.row_sum(0) == 3);
    CHECK(merged.col_sum(1) == 2);
    CHECK(merged.index_of("major") == 1);

    ConfusionMatrix direct({"minor", "major"});
    direct.accumulate_index(0, 0);
    direct.accumulate_index(0, 1);
    direct.accumulate_index(1, 1);
    direct.accumulate_index(0, 0);
    CHECK(direct == merged);

    CHECK_THROWS_AS(a.accumulate("unknown", "minor"), std::invalid_argument);
    ConfusionMatrix mismatched({"x", "y"});
    CHECK_THROWS_AS(merged.merge(mismatched), std::invalid_argument);
}

TEST_CASE("balanced accuracy of a uniform guesser approaches 1/C") {
    Rng rng(20260814);
    ConfusionMatrix cm({"a", "b", "c"});
    for (int i = 0; i < 100000; ++i) {
        // Skewed truth, uniform predictions.
        const double u = rng.next_double();
        const std::size_t truth = u < 0.5 ? 0 : (u < 0.8 ? 1 : 2);
        cm.accumulate_index(truth, rng.next_below(3));
    }
    CHECK(balanced_accuracy(cm) == doctest::Approx(1.0 / 3.0).epsilon(0.03));
    CHECK(unweighted_accuracy(cm) == doctest::Approx(1.0 / 3.0).epsilon(0.03));
}

TEST_CASE("iou matches hand-computed overlaps") {
    BinaryMask a(4, 4), b(4, 4);
    a.set(0, 0, 1);
    a.set(1, 0, 1);
    b.set(0, 0, 1);
    b.set(1, 0, 1);
    CHECK(iou(a, b).value == doctest::Approx(1.0));
    CHECK_FALSE(iou(a, b).degenerate);

    BinaryMask c(4, 4);
    c.set(3, 3, 1);
    CHECK(iou(a, c).value == doctest::Approx(0.0));

    // Intersection 1, union 4.
    BinaryMask d(4, 4);
    d.set(1, 0, 1);
    d.set(2, 0, 1);
    d.set(3, 0, 1);
    CHECK(iou(a, d).value == doctest::Approx(0.25));

    BinaryMask e1(4, 4), e2(4, 4);
    auto deg = iou(e1, e2);
    CHECK(deg.degenerate);
    CHECK(deg.value == doctest::Approx(1.0));

    auto half_empty = iou(a, e1);
    CHECK_FALSE(half_empty.degenerate);
    CHECK(half_empty.value == doctest::Approx(0.0));

    BinaryMask wrong(3, 3);
    CHECK_THROWS_AS(iou(a, wrong), std::invalid_argument);
}

TEST_CASE("metrics report serializes every field") {
    ConfusionMatrix cm = from_counts({9, 1, 0, 2, 7, 1, 0, 3, 7}, 3);
    auto j = nlohmann::json::parse(metrics_report_json(cm));
    CHECK(j["class_names"].size() == 3);
    CHECK(j["counts"][0][0] == 9);
    CHECK(j["counts"][2][1] == 3);
    CHECK(j["macro_f1"].get<double>() == doctest::Approx(0.76719576719576721).epsilon(1e-12));
    CHECK(j["unweighted_accuracy"].get<double>() == doctest::Approx(0.76666666666666672).epsilon(1e-12));
    CHECK(j["balanced_accuracy"].get<double>() == doctest::Approx(0.76666666666666672).epsilon(1e-12));
    CHECK(j["per_class"].size() == 3);
    CHECK(j["per_class"][0]["precision"].get<double>() == doctest::Approx(0.81818181818181823));

    // Empty true row: balanced accuracy becomes null and the flag trips.
    ConfusionMatrix degen = from_counts({1, 0, 0, 0}, 2);
    auto jd = nlohmann::json::parse(metrics_report_json(degen));
    CHECK(jd["balanced_accuracy"].is_null());
    REQUIRE(jd["degeneracy_flags"].is_array());
    bool flagged = false;
    for (const auto& f : jd["degeneracy_flags"])
        if (f.get<std::string>().find("balanced_accuracy undefined") != std::string::npos) flagged = true;
    CHECK(flagged);
}
