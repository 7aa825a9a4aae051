#pragma once

// Deterministic numeric core shared by every module: a reproducible random
// generator (engine output is identical on every platform, and all derived
// draws avoid implementation-defined stdlib distributions), small vector
// helpers, and the common Prediction record.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace apnn {

/// Reproducible random source. Wraps std::mt19937 (its output sequence is
/// fixed by the standard) and layers portable draws on top: Lemire-style
/// bounded integers, a (0,1) uniform, and a Box-Muller gaussian. Two builds
/// given the same seed produce bit-identical streams.
class Rng {
public:
    explicit Rng(std::uint32_t seed) : eng_(seed) {}

    /// Next raw 32-bit engine word.
    std::uint32_t next() { return static_cast<std::uint32_t>(eng_()); }

    /// Uniform integer in [0, n) via multiply-shift reduction.
    std::uint32_t bounded(std::uint32_t n) {
        return static_cast<std::uint32_t>(
            (static_cast<std::uint64_t>(next()) * n) >> 32);
    }

    /// Uniform double strictly inside (0, 1).
    double uniform01() {
        return (static_cast<double>(next()) + 0.5) * 0x1p-32;
    }

    /// Standard normal deviate (Box-Muller, cosine branch; 2 draws each).
    double gaussian() {
        const double u1 = uniform01();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Derive an independent 32-bit stream seed from a base seed and a
    /// stream index (splitmix64 finalizer). Used to give every inference
    /// its own generator so parallel evaluation stays deterministic.
    static std::uint32_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t z = seed * 0x9E3779B97F4A7C15ull + stream + 1;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return static_cast<std::uint32_t>((z ^ (z >> 31)) & 0xFFFFFFFFull);
    }

private:
    std::mt19937 eng_;
};

/// In-place Fisher-Yates shuffle driven by Rng::bounded (descending pass).
template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i-- > 1;) {
        const std::size_t j = rng.bounded(static_cast<std::uint32_t>(i + 1));
        std::swap(v[i], v[j]);
    }
}

/// Dot product with a length check (accumulated left to right so results
/// are reproducible across builds).
inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("dot: length mismatch (" +
                                    std::to_string(a.size()) + " vs " +
                                    std::to_string(b.size()) + ")");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/// Index of the maximum value; ties break toward the lowest index.
inline int argmax_lowest(const std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("argmax_lowest: empty input");
    int best = 0;
    for (int i = 1; i < static_cast<int>(v.size()); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

/// Classifier output: winning class, raw per-class scores, and whether any
/// class produced a nonzero score (false means the input activated nothing
/// and the class id is purely the tie-break default).
struct Prediction {
    int class_id = 0;
    std::vector<double> scores;
    bool activated = false;
};

}  // namespace apnn
