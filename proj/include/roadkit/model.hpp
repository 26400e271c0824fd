#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "roadkit/imageops.hpp"
#include "roadkit/metrics.hpp"

namespace roadkit {

// Fixed-feature multinomial logistic regression. Stands in for the CNN
// classifiers while keeping the optimization recipe: weighted categorical
// cross-entropy minimized with Adam.

inline constexpr int kFeatureDim = 30;

/// Per-channel mean (3) + population std (3) + 8-bin histogram fractions (24).
using FeatureVector = std::array<double, kFeatureDim>;

FeatureVector extract_features(const ImageTensor& img);

/// Per-dimension z-score parameters. Zero-variance dimensions get scale 1.
struct Normalizer {
    std::vector<double> mean;
    std::vector<double> scale;
};

Normalizer fit_normalizer(const std::vector<FeatureVector>& features);

struct TrainConfig {
    double learning_rate = 0.0001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    int epochs = 200;
    int batch_size = 64;
    std::uint64_t seed = 0;
    std::map<std::string, double> class_weights;  // empty == uniform
};

struct ModelParams {
    std::vector<std::string> class_names;
    std::vector<double> weights;  // C x (d+1) row-major, last column bias
    Normalizer normalizer;
    TrainConfig train_config;
    double final_train_loss = 0.0;

    std::size_t num_classes() const { return class_names.size(); }
};

std::vector<double> predict_proba(const ModelParams& params, const FeatureVector& f);
std::size_t predict_class(const ModelParams& params, const FeatureVector& f);

struct LossGradient {
    double loss = 0.0;
    std::vector<double> gradient;  // same shape as weights
};

/// Weighted cross-entropy over the batch: (1/sum w_i) * sum w_i * -log p(y_i),
/// with the exact analytic gradient.
LossGradient loss_and_gradient(const ModelParams& params,
                               const std::vector<FeatureVector>& features,
                               const std::vector<std::size_t>& labels,
                               const std::vector<double>& sample_weights);

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    std::int64_t step = 0;
};

/// One bias-corrected Adam update, in place. Throws "diverged" on a
/// non-finite gradient.
void adam_step(AdamState& state, std::vector<double>& weights,
               const std::vector<double>& gradient, const TrainConfig& config);

struct TrainData {
    std::vector<std::string> class_names;
    std::vector<FeatureVector> features;
    std::vector<std::size_t> labels;  // indices into class_names
};

struct TrainResult {
    ModelParams params;
    std::vector<double> loss_curve;  // per-epoch weighted mean loss
};

/// Epochs x batches of Adam over per-epoch shuffles keyed by (seed, epoch).
/// Deterministic in (data, config).
TrainResult train(const TrainData& data, const TrainConfig& config);

/// Argmax predictions accumulated into a confusion matrix.
ConfusionMatrix evaluate(const ModelParams& params, const std::vector<FeatureVector>& features,
                         const std::vector<std::size_t>& labels);

// JSON round trip with keys: class_names, d, weights, normalizer_mean,
// normalizer_scale, train_config, final_train_loss.
std::string model_to_json(const ModelParams& params);
ModelParams model_from_json(const std::string& text);

}  // namespace roadkit
