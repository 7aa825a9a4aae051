#pragma once

// Threshold-logic approximation of the kernel classifier: a stored column
// "fires" when its dot product with the input lies within theta of 1, the
// class score is the firing fraction, and a winner-takes-all argmax picks
// the class. Thresholds are trained by leave-one-out grid search — a single
// global theta, or one theta per class refined by coordinate descent.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "core.hpp"
#include "dataset.hpp"
#include "pnn.hpp"  // shares detail::loo_dot_matrix for LOO selection
#include "quantizer.hpp"

namespace apnn {

/// Canonical threshold search grid: 64 geometrically spaced values
/// 2^((k-64)/6) for k = 1..64, i.e. six levels per octave from ~6.9e-4 up to
/// 1.0. Unit-norm stored columns concentrate same-class dot products within
/// ~1e-3 of 1.0, so the useful thetas span decades; geometric spacing covers
/// that range where a 64-step uniform grid cannot resolve below 1/64.
inline const std::vector<double>& canonical_theta_grid() {
    static const std::vector<double> g = [] {
        std::vector<double> v(64);
        for (int k = 1; k <= 64; ++k)
            v[k - 1] = std::pow(2.0, static_cast<double>(k - 64) / 6.0);
        return v;
    }();
    return g;
}

/// Hardware threshold grid: the nonzero values k/(n_levels-1) representable
/// by the same n-level device that stores the weights. Restricting theta to
/// this grid models a system whose comparator references share the weight
/// DAC's resolution.
inline std::vector<double> quantized_theta_grid(const QuantizerSpec& q = {}) {
    q.validate();
    std::vector<double> g(q.n_levels - 1);
    for (int k = 1; k < q.n_levels; ++k)
        g[k - 1] = static_cast<double>(k) / static_cast<double>(q.n_levels - 1);
    return g;
}

enum class PolicyKind { Fixed, PerClass };

/// Firing tolerance: one global theta, or one theta per class id.
struct ThresholdPolicy {
    PolicyKind kind = PolicyKind::Fixed;
    double theta = 0.0;              // Fixed
    std::vector<double> per_class;   // PerClass, indexed by class id

    double theta_for(int class_id) const {
        if (kind == PolicyKind::Fixed) return theta;
        return per_class.at(class_id);
    }

    void validate(int n_classes) const {
        auto check = [](double t) {
            if (!(t > 0.0) || t > 1.0)
                throw std::invalid_argument(
                    "ThresholdPolicy: theta must be in (0, 1]");
        };
        if (kind == PolicyKind::Fixed) {
            check(theta);
        } else {
            if (static_cast<int>(per_class.size()) != n_classes)
                throw std::invalid_argument(
                    "ThresholdPolicy: per-class map must cover every class");
            for (double t : per_class) check(t);
        }
    }
};

/// Stored model: one crossbar (column list) per class, the threshold policy,
/// the smoothing factor (pinned to 1 — any other value can be absorbed into
/// theta), and the quantizer its columns were stored with. `quantized` is
/// false for the unquantized variant, whose columns are plain unit vectors.
struct ApnnModel {
    std::vector<std::vector<std::vector<double>>> class_crossbars;
    ThresholdPolicy policy;
    double sigma = 1.0;
    QuantizerSpec quantizer;
    bool quantized = true;
};

/// 1 iff |x.w / sigma - 1| < theta (strict). Throws when theta is outside
/// (0, 1], sigma <= 0, or the lengths differ.
inline int activation(const std::vector<double>& x, const std::vector<double>& w,
                      double sigma, double theta) {
    if (!(theta > 0.0) || theta > 1.0)
        throw std::invalid_argument("activation: theta must be in (0, 1]");
    if (!(sigma > 0.0))
        throw std::invalid_argument("activation: sigma must be > 0");
    return std::abs(dot(x, w) / sigma - 1.0) < theta ? 1 : 0;
}

/// Firing fraction of a class crossbar: (number of firing columns) / N_c.
inline double class_score(const std::vector<double>& x,
                          const std::vector<std::vector<double>>& crossbar,
                          double theta_c, double sigma = 1.0) {
    if (crossbar.empty())
        throw std::invalid_argument("class_score: empty crossbar");
    int cnt = 0;
    for (const auto& w : crossbar) cnt += activation(x, w, sigma, theta_c);
    return static_cast<double>(cnt) / static_cast<double>(crossbar.size());
}

/// Winner-takes-all: index of the maximum score, ties toward the lowest.
inline int wta(const std::vector<double>& scores) {
    if (scores.empty()) throw std::invalid_argument("wta: empty score list");
    return argmax_lowest(scores);
}

/// Score every class with its own theta and pick the winner. activated is
/// false iff no column of any class fired.
inline Prediction apnn_classify(const ApnnModel& m, const std::vector<double>& x) {
    const int n_classes = static_cast<int>(m.class_crossbars.size());
    m.policy.validate(n_classes);
    Prediction p;
    p.scores.resize(n_classes);
    for (int c = 0; c < n_classes; ++c)
        p.scores[c] =
            class_score(x, m.class_crossbars[c], m.policy.theta_for(c), m.sigma);
    p.class_id = wta(p.scores);
    for (double s : p.scores)
        if (s > 0.0) { p.activated = true; break; }
    return p;
}

namespace detail {

/// Leave-one-out accuracy over a precomputed probe-vs-column dot matrix
/// (sigma = 1): the held-out sample's own stored column is excluded from its
/// class's crossbar, since it would fire at any theta.
inline double apnn_loo_accuracy(const std::vector<std::vector<double>>& dots,
                                const std::vector<int>& labels, int n_classes,
                                const std::vector<double>& thetas) {
    const int n = static_cast<int>(labels.size());
    int correct = 0;
    std::vector<int> cnt(n_classes), tot(n_classes);
    std::vector<double> scores(n_classes);
    for (int i = 0; i < n; ++i) {
        std::fill(cnt.begin(), cnt.end(), 0);
        std::fill(tot.begin(), tot.end(), 0);
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const int c = labels[j];
            tot[c] += 1;
            if (std::abs(dots[i][j] - 1.0) < thetas[c]) cnt[c] += 1;
        }
        for (int c = 0; c < n_classes; ++c)
            scores[c] = tot[c] ? static_cast<double>(cnt[c]) / tot[c] : 0.0;
        if (argmax_lowest(scores) == labels[i]) ++correct;
    }
    return static_cast<double>(correct) / n;
}

inline std::vector<int> labels_of(const std::vector<Sample>& train) {
    std::vector<int> labels(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) labels[i] = train[i].label;
    return labels;
}

}  // namespace detail

/// LOO-on-train accuracy of an arbitrary policy (sigma = 1). Exposed so the
/// adaptive trainer's dominance over the fixed theta can be asserted
/// externally. Column quantization mirrors select_sigma's convention.
inline double loo_threshold_accuracy(const std::vector<Sample>& train,
                                     int n_classes, const ThresholdPolicy& policy,
                                     const QuantizerSpec* quantize_with = nullptr) {
    policy.validate(n_classes);
    const auto dots = detail::loo_dot_matrix(train, quantize_with);
    std::vector<double> thetas(n_classes);
    for (int c = 0; c < n_classes; ++c) thetas[c] = policy.theta_for(c);
    return detail::apnn_loo_accuracy(dots, detail::labels_of(train), n_classes,
                                     thetas);
}

/// Grid value maximizing leave-one-out accuracy with one global theta; ties
/// break toward the smaller theta (the grid is scanned in ascending order
/// and only strict improvements are adopted).
inline double train_fixed_threshold(
    const std::vector<Sample>& train, int n_classes,
    const std::vector<double>& grid = canonical_theta_grid(),
    const QuantizerSpec* quantize_with = nullptr) {
    if (train.empty())
        throw std::invalid_argument("train_fixed_threshold: empty training set");
    if (grid.empty())
        throw std::invalid_argument("train_fixed_threshold: empty grid");
    const auto dots = detail::loo_dot_matrix(train, quantize_with);
    const auto labels = detail::labels_of(train);
    double best_t = grid.front();
    double best_a = -1.0;
    std::vector<double> thetas(n_classes);
    for (double t : grid) {
        std::fill(thetas.begin(), thetas.end(), t);
        const double a = detail::apnn_loo_accuracy(dots, labels, n_classes, thetas);
        if (a > best_a) {
            best_a = a;
            best_t = t;
        }
    }
    return best_t;
}

/// Per-class thresholds by coordinate descent: initialize every theta_c to
/// the best single theta, then sweep classes in ascending id order, scanning
/// the grid per class and adopting the smallest theta_c that achieves the
/// maximum LOO accuracy — only on strict improvement — until a full sweep
/// changes nothing (at most max_sweeps sweeps). The result never scores
/// below the fixed theta's LOO accuracy; that is asserted before returning.
inline ThresholdPolicy train_adaptive_thresholds(
    const std::vector<Sample>& train, int n_classes,
    const std::vector<double>& grid = canonical_theta_grid(),
    const QuantizerSpec* quantize_with = nullptr, int max_sweeps = 10) {
    if (train.empty())
        throw std::invalid_argument(
            "train_adaptive_thresholds: empty training set");
    if (grid.empty())
        throw std::invalid_argument("train_adaptive_thresholds: empty grid");
    const auto dots = detail::loo_dot_matrix(train, quantize_with);
    const auto labels = detail::labels_of(train);

    double theta_star = grid.front();
    double best_a = -1.0;
    std::vector<double> thetas(n_classes);
    for (double t : grid) {
        std::fill(thetas.begin(), thetas.end(), t);
        const double a = detail::apnn_loo_accuracy(dots, labels, n_classes, thetas);
        if (a > best_a) {
            best_a = a;
            theta_star = t;
        }
    }

    std::fill(thetas.begin(), thetas.end(), theta_star);
    const double init_acc =
        detail::apnn_loo_accuracy(dots, labels, n_classes, thetas);
    double acc = init_acc;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool changed = false;
        for (int c = 0; c < n_classes; ++c) {
            double cand_t = thetas[c];
            double cand_a = -1.0;
            std::vector<double> cand = thetas;
            for (double t : grid) {
                cand[c] = t;
                const double a =
                    detail::apnn_loo_accuracy(dots, labels, n_classes, cand);
                if (a > cand_a) {
                    cand_a = a;
                    cand_t = t;
                }
            }
            if (cand_a > acc) {
                thetas[c] = cand_t;
                acc = cand_a;
                changed = true;
            }
        }
        if (!changed) break;
    }
    if (acc < init_acc)
        throw std::logic_error(
            "train_adaptive_thresholds: descent lost accuracy (bug)");

    ThresholdPolicy policy;
    policy.kind = PolicyKind::PerClass;
    policy.per_class = thetas;
    return policy;
}

}  // namespace apnn
