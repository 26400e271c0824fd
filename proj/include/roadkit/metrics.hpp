#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "roadkit/raster.hpp"

namespace roadkit {

struct PerClassScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool precision_degenerate = false;  // TP + FP == 0
    bool recall_degenerate = false;     // TP + FN == 0
};

/// Row = true class, column = predicted class.
class ConfusionMatrix {
public:
    ConfusionMatrix() = default;
    explicit ConfusionMatrix(std::vector<std::string> class_names);

    void accumulate(const std::string& true_label, const std::string& predicted);
    void accumulate_index(std::size_t true_index, std::size_t predicted_index);
    void merge(const ConfusionMatrix& other);

    std::size_t num_classes() const { return class_names_.size(); }
    const std::vector<std::string>& class_names() const { return class_names_; }
    std::int64_t count(std::size_t true_index, std::size_t predicted_index) const;
    std::int64_t total() const;
    std::int64_t row_sum(std::size_t i) const;
    std::int64_t col_sum(std::size_t i) const;
    std::size_t index_of(const std::string& label) const;

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

private:
    std::vector<std::string> class_names_;
    std::vector<std::int64_t> counts_;  // row-major C x C
};

/// Per-class precision and recall; zero denominators give 0 with the
/// matching degeneracy flag set. F1 uses the conventional 2pr/(p+r).
std::vector<PerClassScore> precision_recall(const ConfusionMatrix& cm);

double macro_f1(const ConfusionMatrix& cm);

/// trace / total. Errors on an empty matrix.
double unweighted_accuracy(const ConfusionMatrix& cm);

/// Mean of per-class recalls. Errors if any true class has no samples.
double balanced_accuracy(const ConfusionMatrix& cm);

struct IouResult {
    double value = 0.0;
    bool degenerate = false;  // both masks empty; value fixed at 1.0
};

IouResult iou(const BinaryMask& a, const BinaryMask& b);

/// JSON metric report:
/// {class_names, counts, per_class: [{class, precision, recall, f1}],
///  macro_f1, unweighted_accuracy, balanced_accuracy, degeneracy_flags}.
/// balanced_accuracy is null (and flagged) when some row is empty.
std::string metrics_report_json(const ConfusionMatrix& cm);

}  // namespace roadkit
