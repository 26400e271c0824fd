#include "roadkit/model.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "roadkit/rng.hpp"

namespace roadkit {

using ordered_json = nlohmann::ordered_json;

FeatureVector extract_features(const ImageTensor& img) {
    const std::size_t pixels = static_cast<std::size_t>(img.width) * img.height;
    std::array<std::uint64_t, 3> sum{};
    std::array<std::uint64_t, 3> sumsq{};
    std::array<std::array<std::uint64_t, 8>, 3> hist{};
    for (std::size_t i = 0; i < pixels; ++i) {
        for (int c = 0; c < 3; ++c) {
            const std::uint32_t v = img.data[i * 3 + c];
            sum[c] += v;
            sumsq[c] += static_cast<std::uint64_t>(v) * v;
            hist[c][v >> 5] += 1;  // 8 bins of width 32
        }
    }
    FeatureVector f{};
    const double n = static_cast<double>(pixels);
    for (int c = 0; c < 3; ++c) {
        const double mean = static_cast<double>(sum[c]) / n;
        const double var = static_cast<double>(sumsq[c]) / n - mean * mean;
        f[c] = mean;
        f[3 + c] = std::sqrt(std::max(0.0, var));
        for (int b = 0; b < 8; ++b) {
            f[6 + c * 8 + b] = static_cast<double>(hist[c][b]) / n;
        }
    }
    return f;
}

Normalizer fit_normalizer(const std::vector<FeatureVector>& features) {
    if (features.empty()) throw std::invalid_argument("fit_normalizer: no features");
    Normalizer nz;
    nz.mean.assign(kFeatureDim, 0.0);
    nz.scale.assign(kFeatureDim, 1.0);
    const double n = static_cast<double>(features.size());
    for (const auto& f : features) {
        for (int j = 0; j < kFeatureDim; ++j) nz.mean[j] += f[j];
    }
    for (int j = 0; j < kFeatureDim; ++j) nz.mean[j] /= n;
    std::vector<double> var(kFeatureDim, 0.0);
    for (const auto& f : features) {
        for (int j = 0; j < kFeatureDim; ++j) {
            const double d = f[j] - nz.mean[j];
            var[j] += d * d;
        }
    }
    for (int j = 0; j < kFeatureDim; ++j) {
        const double s = std::sqrt(var[j] / n);
        nz.scale[j] = s > 0.0 ? s : 1.0;
    }
    return nz;
}

namespace {

void check_params(const ModelParams& params) {
    const std::size_t c = params.class_names.size();
    if (c == 0) throw std::invalid_argument("model has no classes");
    if (params.weights.size() != c * (kFeatureDim + 1)) {
        throw std::invalid_argument("weight matrix shape mismatch");
    }
    if (params.normalizer.mean.size() != kFeatureDim ||
        params.normalizer.scale.size() != kFeatureDim) {
        throw std::invalid_argument("normalizer dimension mismatch");
    }
}

// logits_c = W[c] . [z; 1]
std::vector<double> logits_of(const ModelParams& params, const FeatureVector& f) {
    const std::size_t c = params.class_names.size();
    std::vector<double> logits(c, 0.0);
    std::array<double, kFeatureDim> z;
    for (int j = 0; j < kFeatureDim; ++j) {
        z[j] = (f[j] - params.normalizer.mean[j]) / params.normalizer.scale[j];
    }
    for (std::size_t k = 0; k < c; ++k) {
        const double* row = params.weights.data() + k * (kFeatureDim + 1);
        double acc = row[kFeatureDim];  // bias
        for (int j = 0; j < kFeatureDim; ++j) acc += row[j] * z[j];
        logits[k] = acc;
    }
    return logits;
}

}  // namespace

std::vector<double> predict_proba(const ModelParams& params, const FeatureVector& f) {
    check_params(params);
    std::vector<double> p = logits_of(params, f);
    const double hi = *std::max_element(p.begin(), p.end());
    double sum = 0.0;
    for (double& v : p) {
        v = std::exp(v - hi);
        sum += v;
    }
    for (double& v : p) v /= sum;
    return p;
}

std::size_t predict_class(const ModelParams& params, const FeatureVector& f) {
    const auto p = predict_proba(params, f);
    return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

LossGradient loss_and_gradient(const ModelParams& params,
                               const std::vector<FeatureVector>& features,
                               const std::vector<std::size_t>& labels,
                               const std::vector<double>& sample_weights) {
    check_params(params);
    if (features.empty()) throw std::invalid_argument("loss_and_gradient: empty batch");
    if (features.size() != labels.size() || features.size() != sample_weights.size()) {
        throw std::invalid_argument("loss_and_gradient: batch arrays differ in length");
    }
    const std::size_t c = params.class_names.size();
    const std::size_t cols = kFeatureDim + 1;

    LossGradient out;
    out.gradient.assign(params.weights.size(), 0.0);

    double weight_sum = 0.0;
    for (double w : sample_weights) weight_sum += w;
    if (!(weight_sum > 0.0)) throw std::invalid_argument("loss_and_gradient: weights sum to zero");

    for (std::size_t i = 0; i < features.size(); ++i) {
        if (labels[i] >= c) throw std::invalid_argument("loss_and_gradient: label index out of range");
        std::array<double, kFeatureDim> z;
        for (int j = 0; j < kFeatureDim; ++j) {
            z[j] = (features[i][j] - params.normalizer.mean[j]) / params.normalizer.scale[j];
        }
        std::vector<double> logits(c, 0.0);
        for (std::size_t k = 0; k < c; ++k) {
            const double* row = params.weights.data() + k * cols;
            double acc = row[kFeatureDim];
            for (int j = 0; j < kFeatureDim; ++j) acc += row[j] * z[j];
            logits[k] = acc;
        }
        const double hi = *std::max_element(logits.begin(), logits.end());
        double expsum = 0.0;
        for (double v : logits) expsum += std::exp(v - hi);
        const double log_z = hi + std::log(expsum);
        const double w = sample_weights[i];
        out.loss += w * (log_z - logits[labels[i]]);

        for (std::size_t k = 0; k < c; ++k) {
            const double p = std::exp(logits[k] - log_z);
            const double delta = w * (p - (k == labels[i] ? 1.0 : 0.0));
            double* grow = out.gradient.data() + k * cols;
            for (int j = 0; j < kFeatureDim; ++j) grow[j] += delta * z[j];
            grow[kFeatureDim] += delta;
        }
    }
    out.loss /= weight_sum;
    for (double& g : out.gradient) g /= weight_sum;
    return out;
}

void adam_step(AdamState& state, std::vector<double>& weights,
               const std::vector<double>& gradient, const TrainConfig& config) {
    if (gradient.size() != weights.size()) {
        throw std::invalid_argument("adam_step: gradient shape mismatch");
    }
    for (double g : gradient) {
        if (!std::isfinite(g)) throw std::runtime_error("diverged: non-finite gradient");
    }
    if (state.m.size() != weights.size()) {
        state.m.assign(weights.size(), 0.0);
        state.v.assign(weights.size(), 0.0);
        state.step = 0;
    }
    state.step += 1;
    const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < weights.size(); ++i) {
        state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * gradient[i];
        state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * gradient[i] * gradient[i];
        const double m_hat = state.m[i] / bc1;
        const double v_hat = state.v[i] / bc2;
        weights[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
}

TrainResult train(const TrainData& data, const TrainConfig& config) {
    const std::size_t c = data.class_names.size();
    if (c < 2) throw std::invalid_argument("train: need at least 2 classes");
    if (data.features.size() != data.labels.size() || data.features.empty()) {
        throw std::invalid_argument("train: empty or inconsistent training data");
    }
    std::vector<std::int64_t> per_class(c, 0);
    for (std::size_t y : data.labels) {
        if (y >= c) throw std::invalid_argument("train: label index out of range");
        per_class[y] += 1;
    }
    for (std::size_t k = 0; k < c; ++k) {
        if (per_class[k] == 0) {
            throw std::runtime_error("train: class '" + data.class_names[k] +
                                     "' missing from training data");
        }
    }
    if (config.learning_rate <= 0.0) throw std::invalid_argument("train: learning_rate must be > 0");
    if (config.batch_size < 1 || config.epochs < 1) {
        throw std::invalid_argument("train: epochs and batch_size must be >= 1");
    }

    // per-sample weights from the per-class table; uniform when absent
    std::vector<double> weight_of_class(c, 1.0);
    if (!config.class_weights.empty()) {
        for (std::size_t k = 0; k < c; ++k) {
            const auto it = config.class_weights.find(data.class_names[k]);
            if (it == config.class_weights.end()) {
                throw std::invalid_argument("train: class_weights missing entry for '" +
                                            data.class_names[k] + "'");
            }
            weight_of_class[k] = it->second;
        }
    }

    TrainResult result;
    ModelParams& params = result.params;
    params.class_names = data.class_names;
    params.weights.assign(c * (kFeatureDim + 1), 0.0);
    params.normalizer = fit_normalizer(data.features);
    params.train_config = config;

    AdamState adam;
    const std::size_t n = data.features.size();
    std::vector<std::size_t> order(n);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        Rng rng = Rng::keyed(config.seed, "epoch", static_cast<std::uint64_t>(epoch));
        rng.shuffle(order);

        double loss_num = 0.0;
        double loss_den = 0.0;
        for (std::size_t start = 0; start < n; start += config.batch_size) {
            const std::size_t stop = std::min(n, start + config.batch_size);
            std::vector<FeatureVector> bf;
            std::vector<std::size_t> by;
            std::vector<double> bw;
            bf.reserve(stop - start);
            for (std::size_t i = start; i < stop; ++i) {
                bf.push_back(data.features[order[i]]);
                by.push_back(data.labels[order[i]]);
                bw.push_back(weight_of_class[data.labels[order[i]]]);
            }
            const LossGradient lg = loss_and_gradient(params, bf, by, bw);
            double batch_weight = 0.0;
            for (double w : bw) batch_weight += w;
            loss_num += lg.loss * batch_weight;
            loss_den += batch_weight;
            adam_step(adam, params.weights, lg.gradient, config);
        }
        result.loss_curve.push_back(loss_num / loss_den);
    }
    params.final_train_loss = result.loss_curve.back();
    return result;
}

ConfusionMatrix evaluate(const ModelParams& params, const std::vector<FeatureVector>& features,
                         const std::vector<std::size_t>& labels) {
    check_params(params);
    if (features.size() != labels.size()) {
        throw std::invalid_argument("evaluate: features and labels differ in length");
    }
    ConfusionMatrix cm(params.class_names);
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (labels[i] >= params.class_names.size()) {
            throw std::invalid_argument("evaluate: label index outside model classes");
        }
        cm.accumulate_index(labels[i], predict_class(params, features[i]));
    }
    return cm;
}

std::string model_to_json(const ModelParams& params) {
    ordered_json j;
    j["class_names"] = params.class_names;
    j["d"] = kFeatureDim;
    j["weights"] = params.weights;
    j["normalizer_mean"] = params.normalizer.mean;
    j["normalizer_scale"] = params.normalizer.scale;
    ordered_json tc;
    tc["learning_rate"] = params.train_config.learning_rate;
    tc["beta1"] = params.train_config.beta1;
    tc["beta2"] = params.train_config.beta2;
    tc["epsilon"] = params.train_config.epsilon;
    tc["epochs"] = params.train_config.epochs;
    tc["batch_size"] = params.train_config.batch_size;
    tc["seed"] = params.train_config.seed;
    tc["class_weights"] = params.train_config.class_weights;
    j["train_config"] = tc;
    j["final_train_loss"] = params.final_train_loss;
    return j.dump(2);
}

ModelParams model_from_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(std::string("model JSON: ") + e.what());
    }
    ModelParams p;
    p.class_names = j.at("class_names").get<std::vector<std::string>>();
    if (j.at("d").get<int>() != kFeatureDim) {
        throw std::runtime_error("model JSON: unsupported feature dimension");
    }
    p.weights = j.at("weights").get<std::vector<double>>();
    p.normalizer.mean = j.at("normalizer_mean").get<std::vector<double>>();
    p.normalizer.scale = j.at("normalizer_scale").get<std::vector<double>>();
    const auto& tc = j.at("train_config");
    p.train_config.learning_rate = tc.at("learning_rate").get<double>();
    p.train_config.beta1 = tc.at("beta1").get<double>();
    p.train_config.beta2 = tc.at("beta2").get<double>();
    p.train_config.epsilon = tc.at("epsilon").get<double>();
    p.train_config.epochs = tc.at("epochs").get<int>();
    p.train_config.batch_size = tc.at("batch_size").get<int>();
    p.train_config.seed = tc.at("seed").get<std::uint64_t>();
    p.train_config.class_weights = tc.at("class_weights").get<std::map<std::string, double>>();
    p.final_train_loss = j.at("final_train_loss").get<double>();
    check_params(p);
    return p;
}

}  // namespace roadkit
