#pragma once

// Reference probabilistic classifier with an exponential kernel pattern
// layer. Stored weight columns are unit-normalized training samples; scoring
// averages the kernel response per class and picks the argmax. The smoothing
// factor is chosen by leave-one-out accuracy on the training set alone.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "core.hpp"
#include "dataset.hpp"
#include "quantizer.hpp"

namespace apnn {

/// Smoothing-factor search grid (ascending; ties in selection resolve to the
/// smaller value).
inline const std::vector<double>& sigma_grid() {
    static const std::vector<double> g = {0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0};
    return g;
}

/// Kernel response for a precomputed dot product d = x.w:
///   (1 / sqrt(2*pi*sigma^2)) * exp((d - 1) / sigma^2)
/// The exponent saturates to IEEE +inf instead of erroring when d > 1 drives
/// exp past the double range (reachable only with quantized columns whose
/// norm exceeds 1 at very small sigma).
inline double pattern_output_from_dot(double d, double sigma) {
    if (!(sigma > 0.0))
        throw std::invalid_argument("pattern_output: sigma must be > 0");
    const double e = std::exp((d - 1.0) / (sigma * sigma));
    return e / std::sqrt(2.0 * std::numbers::pi * sigma * sigma);
}

/// Kernel response for a stored weight column; maximal over unit inputs at
/// x = w. Throws on sigma <= 0 or length mismatch.
inline double pattern_output(const std::vector<double>& x,
                             const std::vector<double>& w, double sigma) {
    if (!(sigma > 0.0))
        throw std::invalid_argument("pattern_output: sigma must be > 0");
    return pattern_output_from_dot(dot(x, w), sigma);
}

/// Stored model: one column list per class (each column a feature vector of
/// length F), the smoothing factor, and whether columns were quantized.
struct PnnModel {
    std::vector<std::vector<std::vector<double>>> class_weights;
    double sigma = 0.1;
    bool quantized = false;
};

/// Per-class score = mean kernel response over that class's columns;
/// predicted class = argmax with lowest-index tie-break.
inline Prediction pnn_classify(const PnnModel& m, const std::vector<double>& x) {
    const int n_classes = static_cast<int>(m.class_weights.size());
    Prediction p;
    p.scores.resize(n_classes, 0.0);
    for (int c = 0; c < n_classes; ++c) {
        double sum = 0.0;
        for (const auto& w : m.class_weights[c])
            sum += pattern_output(x, w, m.sigma);
        const std::size_t n = m.class_weights[c].size();
        p.scores[c] = n ? sum / static_cast<double>(n) : 0.0;
    }
    p.class_id = argmax_lowest(p.scores);
    for (double s : p.scores)
        if (s > 0.0) { p.activated = true; break; }
    return p;
}

namespace detail {

/// Leave-one-out accuracy of the kernel classifier over a precomputed dot
/// matrix dots[i][j] = probe_i . column_j (the held-out sample's own column
/// is skipped).
inline double pnn_loo_accuracy(const std::vector<std::vector<double>>& dots,
                               const std::vector<int>& labels, int n_classes,
                               double sigma) {
    const int n = static_cast<int>(labels.size());
    int correct = 0;
    std::vector<double> sums(n_classes);
    std::vector<int> cnts(n_classes);
    std::vector<double> scores(n_classes);
    for (int i = 0; i < n; ++i) {
        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(cnts.begin(), cnts.end(), 0);
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            sums[labels[j]] += pattern_output_from_dot(dots[i][j], sigma);
            cnts[labels[j]] += 1;
        }
        for (int c = 0; c < n_classes; ++c)
            scores[c] = cnts[c] ? sums[c] / cnts[c] : 0.0;
        if (argmax_lowest(scores) == labels[i]) ++correct;
    }
    return static_cast<double>(correct) / n;
}

/// Probe-vs-column dot matrix for LOO selection: probes are the normalized
/// training samples as given; columns are the same vectors, optionally
/// quantized (stored weights are quantized, held-out probes are not).
inline std::vector<std::vector<double>> loo_dot_matrix(
    const std::vector<Sample>& train, const QuantizerSpec* quantize_with) {
    const int n = static_cast<int>(train.size());
    std::vector<std::vector<double>> cols(n);
    for (int j = 0; j < n; ++j)
        cols[j] = quantize_with ? quantize_vector(train[j].features, *quantize_with)
                                : train[j].features;
    std::vector<std::vector<double>> dots(n, std::vector<double>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) dots[i][j] = dot(train[i].features, cols[j]);
    return dots;
}

}  // namespace detail

/// Grid value maximizing leave-one-out accuracy within the training set
/// (each held-out sample scored against the remaining columns); ties break
/// toward the smaller sigma. `train` must be unit-normalized; when
/// quantize_with is non-null the stored columns are quantized while held-out
/// probes stay unquantized, mirroring how models are built.
inline double select_sigma(const std::vector<Sample>& train, int n_classes,
                           const std::vector<double>& grid = sigma_grid(),
                           const QuantizerSpec* quantize_with = nullptr) {
    if (train.empty())
        throw std::invalid_argument("select_sigma: empty training set");
    if (grid.empty())
        throw std::invalid_argument("select_sigma: empty grid");
    const auto dots = detail::loo_dot_matrix(train, quantize_with);
    std::vector<int> labels(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) labels[i] = train[i].label;
    double best_s = grid.front();
    double best_a = -1.0;
    for (double s : grid) {
        const double a = detail::pnn_loo_accuracy(dots, labels, n_classes, s);
        if (a > best_a) {
            best_a = a;
            best_s = s;
        }
    }
    return best_s;
}

}  // namespace apnn
