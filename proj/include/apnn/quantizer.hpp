#pragma once

// Uniform n-level quantization of weights in a fixed range, modeling storage
// on devices with a finite set of programmable states (16 levels by default).

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace apnn {

/// Level set description: v_k = range_lo + k * step for k = 0..n_levels-1,
/// with step = (range_hi - range_lo) / (n_levels - 1).
struct QuantizerSpec {
    int n_levels = 16;
    double range_lo = 0.0;
    double range_hi = 1.0;

    void validate() const {
        if (n_levels < 2)
            throw std::invalid_argument("QuantizerSpec: n_levels must be >= 2");
        if (!(range_lo < range_hi))
            throw std::invalid_argument(
                "QuantizerSpec: range_lo must be < range_hi");
    }

    double step() const { return (range_hi - range_lo) / (n_levels - 1); }
};

/// Snap w to the nearest level value. Inputs outside the range clamp to the
/// boundary level; exact midpoints round to the higher level. Throws
/// std::invalid_argument for non-finite input or an invalid spec.
inline double quantize(double w, const QuantizerSpec& q = {}) {
    q.validate();
    if (!std::isfinite(w))
        throw std::invalid_argument("quantize: non-finite input");
    const double step = q.step();
    const double c = std::min(std::max(w, q.range_lo), q.range_hi);
    long long k = static_cast<long long>(std::floor((c - q.range_lo) / step + 0.5));
    k = std::min<long long>(std::max<long long>(k, 0), q.n_levels - 1);
    return q.range_lo + static_cast<double>(k) * step;
}

inline std::vector<double> quantize_vector(const std::vector<double>& v,
                                           const QuantizerSpec& q = {}) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = quantize(v[i], q);
    return out;
}

/// Elementwise quantize; shape preserved. Rows may differ in length (the
/// matrix is a plain row list).
inline std::vector<std::vector<double>> quantize_matrix(
    const std::vector<std::vector<double>>& m, const QuantizerSpec& q = {}) {
    std::vector<std::vector<double>> out(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) out[i] = quantize_vector(m[i], q);
    return out;
}

}  // namespace apnn
