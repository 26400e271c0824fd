#include "roadkit/metrics.hpp"

#include <nlohmann/json.hpp>

#include <stdexcept>

namespace roadkit {

using ordered_json = nlohmann::ordered_json;

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> class_names)
    : class_names_(std::move(class_names)),
      counts_(class_names_.size() * class_names_.size(), 0) {
    if (class_names_.empty()) throw std::invalid_argument("confusion matrix needs >= 1 class");
}

std::size_t ConfusionMatrix::index_of(const std::string& label) const {
    for (std::size_t i = 0; i < class_names_.size(); ++i) {
        if (class_names_[i] == label) return i;
    }
    throw std::invalid_argument("unknown label: " + label);
}

void ConfusionMatrix::accumulate(const std::string& true_label, const std::string& predicted) {
    accumulate_index(index_of(true_label), index_of(predicted));
}

void ConfusionMatrix::accumulate_index(std::size_t true_index, std::size_t predicted_index) {
    const std::size_t c = class_names_.size();
    if (true_index >= c || predicted_index >= c) {
        throw std::invalid_argument("confusion matrix index out of range");
    }
    counts_[true_index * c + predicted_index] += 1;
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
    if (other.class_names_ != class_names_) {
        throw std::invalid_argument("cannot merge confusion matrices with different classes");
    }
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

std::int64_t ConfusionMatrix::count(std::size_t t, std::size_t p) const {
    return counts_[t * class_names_.size() + p];
}

std::int64_t ConfusionMatrix::total() const {
    std::int64_t s = 0;
    for (auto v : counts_) s += v;
    return s;
}

std::int64_t ConfusionMatrix::row_sum(std::size_t i) const {
    std::int64_t s = 0;
    for (std::size_t j = 0; j < class_names_.size(); ++j) s += count(i, j);
    return s;
}

std::int64_t ConfusionMatrix::col_sum(std::size_t i) const {
    std::int64_t s = 0;
    for (std::size_t j = 0; j < class_names_.size(); ++j) s += count(j, i);
    return s;
}

std::vector<PerClassScore> precision_recall(const ConfusionMatrix& cm) {
    const std::size_t c = cm.num_classes();
    std::vector<PerClassScore> out(c);
    for (std::size_t i = 0; i < c; ++i) {
        const std::int64_t tp = cm.count(i, i);
        const std::int64_t fp = cm.col_sum(i) - tp;
        const std::int64_t fn = cm.row_sum(i) - tp;
        PerClassScore& s = out[i];
        if (tp + fp == 0) {
            s.precision_degenerate = true;
        } else {
            s.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        }
        if (tp + fn == 0) {
            s.recall_degenerate = true;
        } else {
            s.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
        }
        if (s.precision + s.recall > 0.0) {
            s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
        }
    }
    return out;
}

double macro_f1(const ConfusionMatrix& cm) {
    const auto scores = precision_recall(cm);
    double sum = 0.0;
    for (const auto& s : scores) sum += s.f1;
    return sum / static_cast<double>(scores.size());
}

double unweighted_accuracy(const ConfusionMatrix& cm) {
    const std::int64_t total = cm.total();
    if (total == 0) throw std::invalid_argument("unweighted_accuracy: empty confusion matrix");
    std::int64_t trace = 0;
    for (std::size_t i = 0; i < cm.num_classes(); ++i) trace += cm.count(i, i);
    return static_cast<double>(trace) / static_cast<double>(total);
}

double balanced_accuracy(const ConfusionMatrix& cm) {
    const std::size_t c = cm.num_classes();
    double sum = 0.0;
    for (std::size_t i = 0; i < c; ++i) {
        const std::int64_t row = cm.row_sum(i);
        if (row == 0) {
            throw std::invalid_argument("balanced_accuracy: class '" + cm.class_names()[i] +
                                        "' has no true samples");
        }
        sum += static_cast<double>(cm.count(i, i)) / static_cast<double>(row);
    }
    return sum / static_cast<double>(c);
}

IouResult iou(const BinaryMask& a, const BinaryMask& b) {
    if (a.width != b.width || a.height != b.height) {
        throw std::invalid_argument("iou: dimension mismatch");
    }
    std::int64_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        const bool av = a.values[i] != 0;
        const bool bv = b.values[i] != 0;
        inter += (av && bv) ? 1 : 0;
        uni += (av || bv) ? 1 : 0;
    }
    if (uni == 0) return IouResult{1.0, true};
    return IouResult{static_cast<double>(inter) / static_cast<double>(uni), false};
}

std::string metrics_report_json(const ConfusionMatrix& cm) {
    const auto scores = precision_recall(cm);
    ordered_json report;
    report["class_names"] = cm.class_names();
    std::vector<std::vector<std::int64_t>> counts;
    for (std::size_t i = 0; i < cm.num_classes(); ++i) {
        std::vector<std::int64_t> row;
        for (std::size_t j = 0; j < cm.num_classes(); ++j) row.push_back(cm.count(i, j));
        counts.push_back(std::move(row));
    }
    report["counts"] = counts;

    std::vector<std::string> flags;
    ordered_json per_class = ordered_json::array();
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const auto& s = scores[i];
        per_class.push_back({{"class", cm.class_names()[i]},
                             {"precision", s.precision},
                             {"recall", s.recall},
                             {"f1", s.f1}});
        if (s.precision_degenerate) {
            flags.push_back("precision undefined for class '" + cm.class_names()[i] +
                            "' (never predicted); reported as 0");
        }
        if (s.recall_degenerate) {
            flags.push_back("recall undefined for class '" + cm.class_names()[i] +
                            "' (no true samples); reported as 0");
        }
    }
    report["per_class"] = per_class;
    report["macro_f1"] = macro_f1(cm);
    report["unweighted_accuracy"] = unweighted_accuracy(cm);

    bool rows_ok = true;
    for (std::size_t i = 0; i < cm.num_classes(); ++i) {
        if (cm.row_sum(i) == 0) rows_ok = false;
    }
    if (rows_ok) {
        report["balanced_accuracy"] = balanced_accuracy(cm);
    } else {
        report["balanced_accuracy"] = nullptr;
        flags.push_back("balanced_accuracy undefined: some class has no true samples");
    }
    report["degeneracy_flags"] = flags;
    return report.dump(2);
}

}  // namespace roadkit
