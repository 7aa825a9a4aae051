#pragma once

// Stratified k-fold cross-validation over the five classifier variants.
// Per fold: build the model from the training folds only (normalize, then
// quantize for the -q variants; hyperparameters selected by leave-one-out on
// the training split), evaluate on the held-out fold, and report per-fold
// accuracy, chosen hyperparameters, and confusion matrices.

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "core.hpp"
#include "crossbar.hpp"
#include "dataset.hpp"
#include "pnn.hpp"
#include "quantizer.hpp"
#include "threshold_logic.hpp"

namespace apnn {

/// The five classifier variants of the accuracy ladder. The -q variants
/// store quantized columns. apnn-fixed-q additionally restricts its
/// threshold search to the hardware grid (values representable at the weight
/// quantizer's resolution), modeling comparator references with the same
/// precision as the stored weights.
enum class Method { Pnn, PnnQ, ApnnFixed, ApnnFixedQ, ApnnAdaptiveQ };

inline Method parse_method(const std::string& name) {
    if (name == "pnn") return Method::Pnn;
    if (name == "pnn-q") return Method::PnnQ;
    if (name == "apnn-fixed") return Method::ApnnFixed;
    if (name == "apnn-fixed-q") return Method::ApnnFixedQ;
    if (name == "apnn-adaptive-q") return Method::ApnnAdaptiveQ;
    throw std::invalid_argument(
        "unknown method '" + name +
        "' (expected pnn, pnn-q, apnn-fixed, apnn-fixed-q, apnn-adaptive-q)");
}

inline std::string method_name(Method m) {
    switch (m) {
        case Method::Pnn: return "pnn";
        case Method::PnnQ: return "pnn-q";
        case Method::ApnnFixed: return "apnn-fixed";
        case Method::ApnnFixedQ: return "apnn-fixed-q";
        case Method::ApnnAdaptiveQ: return "apnn-adaptive-q";
    }
    throw std::invalid_argument("unknown method");
}

inline bool method_quantized(Method m) {
    return m == Method::PnnQ || m == Method::ApnnFixedQ ||
           m == Method::ApnnAdaptiveQ;
}

inline bool method_is_pnn(Method m) {
    return m == Method::Pnn || m == Method::PnnQ;
}

struct FoldResult {
    double accuracy = 0.0;
    /// Chosen smoothing factor (kernel methods only).
    std::optional<double> sigma;
    /// Chosen thresholds (threshold methods only): one entry for a fixed
    /// theta, one per class for an adaptive policy.
    std::vector<double> thetas;
    /// confusion[true_class][predicted_class] over the held-out fold.
    std::vector<std::vector<int>> confusion;
};

struct CvReport {
    Method method = Method::Pnn;
    int k = 0;
    long long seed = 0;
    std::vector<FoldResult> folds;
    double mean_accuracy = 0.0;
    /// Sum of the per-fold confusion matrices.
    std::vector<std::vector<int>> confusion_total;
};

struct CvOptions {
    QuantizerSpec quantizer{};
    /// When set, threshold methods skip training and use this theta for
    /// every class (threshold-sweep support). Ignored by kernel methods.
    std::optional<double> forced_theta;
    /// Evaluate held-out samples through the analog chain instead of the
    /// digital classifier (threshold methods only). Conductance variation
    /// draws its per-inference generator from (electrical.seed, global
    /// sample index).
    bool analog_eval = false;
    ElectricalConfig electrical{};
};

/// One trained fold model (either kind), kept so sweeps can retrain per fold
/// once and re-evaluate cheaply.
struct FoldModel {
    std::vector<int> test_indices;
    PnnModel pnn;
    ApnnModel apnn;
};

namespace detail {

inline std::vector<Sample> normalized_train(const Dataset& d,
                                            const std::vector<int>& train_idx) {
    std::vector<Sample> out;
    out.reserve(train_idx.size());
    for (int i : train_idx)
        out.push_back(unit_normalize(d.samples[i], i));
    return out;
}

}  // namespace detail

/// Train the model of one fold. train_idx must index the training samples;
/// hyperparameter selection never touches anything else.
inline FoldModel train_fold(const Dataset& d, const std::vector<int>& train_idx,
                            Method method, const CvOptions& opt) {
    opt.quantizer.validate();
    const bool quantized = method_quantized(method);
    const auto train = detail::normalized_train(d, train_idx);
    const QuantizerSpec* qspec = quantized ? &opt.quantizer : nullptr;

    FoldModel fm;
    if (method_is_pnn(method)) {
        fm.pnn.sigma = select_sigma(train, d.n_classes, sigma_grid(), qspec);
        fm.pnn.quantized = quantized;
        fm.pnn.class_weights.assign(d.n_classes, {});
        for (const auto& s : train)
            fm.pnn.class_weights[s.label].push_back(
                quantized ? quantize_vector(s.features, opt.quantizer)
                          : s.features);
    } else {
        ThresholdPolicy policy;
        if (opt.forced_theta) {
            policy.kind = PolicyKind::Fixed;
            policy.theta = *opt.forced_theta;
        } else if (method == Method::ApnnAdaptiveQ) {
            policy = train_adaptive_thresholds(train, d.n_classes,
                                               canonical_theta_grid(), qspec);
        } else {
            const auto& grid = method == Method::ApnnFixedQ
                                   ? quantized_theta_grid(opt.quantizer)
                                   : canonical_theta_grid();
            policy.kind = PolicyKind::Fixed;
            policy.theta = train_fixed_threshold(train, d.n_classes, grid, qspec);
        }
        fm.apnn.policy = policy;
        fm.apnn.quantizer = opt.quantizer;
        fm.apnn.quantized = quantized;
        fm.apnn.class_crossbars.assign(d.n_classes, {});
        for (const auto& s : train)
            fm.apnn.class_crossbars[s.label].push_back(
                quantized ? quantize_vector(s.features, opt.quantizer)
                          : s.features);
    }
    return fm;
}

/// Classify one dataset sample with a fold model. sample_index seeds the
/// per-inference variation stream on the analog path.
inline Prediction classify_with_fold(const FoldModel& fm, Method method,
                                     const Dataset& d, int sample_index,
                                     const CvOptions& opt) {
    const auto x = unit_normalize(d.samples[sample_index].features, sample_index);
    if (method_is_pnn(method)) return pnn_classify(fm.pnn, x);
    if (opt.analog_eval)
        return analog_forward(fm.apnn, x, opt.electrical, sample_index).first;
    return apnn_classify(fm.apnn, x);
}

/// Full cross-validation run. Deterministic for fixed inputs: the fold split
/// is a pure function of (dataset, k, seed), training is deterministic, and
/// any variation noise is derived from (electrical.seed, sample index).
inline CvReport cross_validate(const Dataset& d, Method method, int k,
                               long long seed, const CvOptions& opt = {}) {
    const FoldSplit split = kfold(d, k, seed);
    CvReport report;
    report.method = method;
    report.k = k;
    report.seed = seed;
    report.confusion_total.assign(d.n_classes,
                                  std::vector<int>(d.n_classes, 0));

    double acc_sum = 0.0;
    for (int f = 0; f < k; ++f) {
        std::vector<int> train_idx;
        for (int g = 0; g < k; ++g)
            if (g != f)
                train_idx.insert(train_idx.end(), split.folds[g].begin(),
                                 split.folds[g].end());
        std::sort(train_idx.begin(), train_idx.end());

        FoldModel fm = train_fold(d, train_idx, method, opt);
        fm.test_indices = split.folds[f];

        FoldResult fr;
        fr.confusion.assign(d.n_classes, std::vector<int>(d.n_classes, 0));
        int correct = 0;
        for (int i : fm.test_indices) {
            const Prediction p = classify_with_fold(fm, method, d, i, opt);
            const int truth = d.samples[i].label;
            fr.confusion[truth][p.class_id] += 1;
            report.confusion_total[truth][p.class_id] += 1;
            if (p.class_id == truth) ++correct;
        }
        fr.accuracy = static_cast<double>(correct) /
                      static_cast<double>(fm.test_indices.size());
        if (method_is_pnn(method)) {
            fr.sigma = fm.pnn.sigma;
        } else if (fm.apnn.policy.kind == PolicyKind::Fixed) {
            fr.thetas = {fm.apnn.policy.theta};
        } else {
            fr.thetas = fm.apnn.policy.per_class;
        }
        acc_sum += fr.accuracy;
        report.folds.push_back(std::move(fr));
    }
    report.mean_accuracy = acc_sum / static_cast<double>(k);
    return report;
}

}  // namespace apnn
