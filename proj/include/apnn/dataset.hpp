#pragma once

// Dataset ingestion, unit normalization, and deterministic stratified k-fold
// splitting. CSV format: F numeric feature columns followed by one label
// column; an optional single header row is auto-detected.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "core.hpp"

namespace apnn {

/// One labeled observation. Labels are dense class ids in [0, n_classes).
struct Sample {
    std::vector<double> features;
    int label = 0;
};

struct Dataset {
    std::vector<Sample> samples;
    int n_features = 0;
    int n_classes = 0;
    /// Original label strings in first-appearance order; label_names[c] is
    /// the raw label that was densified to class id c.
    std::vector<std::string> label_names;
};

/// Disjoint index lists covering every sample, stratified by class.
struct FoldSplit {
    int k = 0;
    long long seed = 0;
    std::vector<std::vector<int>> folds;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(trim(cur));
    return out;
}

inline bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

}  // namespace detail

/// Load a CSV of F numeric columns plus one label column. Labels are
/// re-indexed densely 0..C-1 in first-appearance order (the mapping is kept
/// in Dataset::label_names). A header row is detected when any feature
/// column of the first row fails to parse as a number.
///
/// Throws std::runtime_error when the file cannot be opened, and
/// std::invalid_argument for an empty file, a ragged row (named by its
/// 1-based line number), a non-numeric or non-finite feature, or fewer than
/// 2 classes.
inline Dataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_csv: cannot open '" + path + "'");

    std::vector<std::pair<int, std::vector<std::string>>> rows;  // (line no, fields)
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        rows.emplace_back(line_no, detail::split_csv_line(line));
    }
    if (rows.empty())
        throw std::invalid_argument("load_csv: empty file '" + path + "'");

    // Header detection: first row is a header iff some feature column
    // (every column but the last) is non-numeric.
    std::size_t start = 0;
    {
        const auto& fields = rows[0].second;
        if (fields.size() < 2)
            throw std::invalid_argument(
                "load_csv: row " + std::to_string(rows[0].first) +
                " has fewer than 2 fields");
        bool header = false;
        double tmp;
        for (std::size_t c = 0; c + 1 < fields.size(); ++c)
            if (!detail::parse_double(fields[c], tmp)) header = true;
        if (header) start = 1;
    }
    if (start >= rows.size())
        throw std::invalid_argument("load_csv: no data rows in '" + path + "'");

    const int n_features = static_cast<int>(rows[start].second.size()) - 1;
    if (n_features < 1)
        throw std::invalid_argument(
            "load_csv: row " + std::to_string(rows[start].first) +
            " has no feature columns");

    Dataset d;
    d.n_features = n_features;
    for (std::size_t r = start; r < rows.size(); ++r) {
        const int row_no = rows[r].first;
        const auto& fields = rows[r].second;
        if (static_cast<int>(fields.size()) != n_features + 1)
            throw std::invalid_argument(
                "load_csv: ragged row " + std::to_string(row_no) + ": expected " +
                std::to_string(n_features + 1) + " fields, got " +
                std::to_string(fields.size()));
        Sample s;
        s.features.resize(n_features);
        for (int c = 0; c < n_features; ++c) {
            if (!detail::parse_double(fields[c], s.features[c]))
                throw std::invalid_argument(
                    "load_csv: non-numeric feature '" + fields[c] + "' at row " +
                    std::to_string(row_no) + ", column " + std::to_string(c + 1));
            if (!std::isfinite(s.features[c]))
                throw std::invalid_argument(
                    "load_csv: non-finite feature at row " + std::to_string(row_no) +
                    ", column " + std::to_string(c + 1));
        }
        const std::string& raw = fields[n_features];
        int label = -1;
        for (std::size_t i = 0; i < d.label_names.size(); ++i)
            if (d.label_names[i] == raw) { label = static_cast<int>(i); break; }
        if (label < 0) {
            label = static_cast<int>(d.label_names.size());
            d.label_names.push_back(raw);
        }
        s.label = label;
        d.samples.push_back(std::move(s));
    }
    d.n_classes = static_cast<int>(d.label_names.size());
    if (d.n_classes < 2)
        throw std::invalid_argument("load_csv: fewer than 2 classes in '" +
                                    path + "'");
    return d;
}

/// Scale a feature vector to unit L2 norm. sample_index (when >= 0) names
/// the offending sample in the zero-vector error message.
inline std::vector<double> unit_normalize(const std::vector<double>& features,
                                          long long sample_index = -1) {
    double sq = 0.0;
    for (double a : features) sq += a * a;
    const double n = std::sqrt(sq);
    if (n == 0.0) {
        std::string where = sample_index >= 0
                                ? " (sample " + std::to_string(sample_index) + ")"
                                : "";
        throw std::invalid_argument("unit_normalize: zero vector" + where);
    }
    std::vector<double> out(features.size());
    for (std::size_t i = 0; i < features.size(); ++i) out[i] = features[i] / n;
    return out;
}

inline Sample unit_normalize(const Sample& s, long long sample_index = -1) {
    return Sample{unit_normalize(s.features, sample_index), s.label};
}

/// Deterministic stratified k-fold split. Per class in ascending class-id
/// order, the class's file-order indices are shuffled (one generator, seeded
/// once, consumed across classes) and dealt round-robin with a per-class
/// offset so fold sizes stay balanced; each fold is then sorted.
inline FoldSplit kfold(const Dataset& d, int k, long long seed) {
    if (k < 2) throw std::invalid_argument("kfold: k must be >= 2");
    Rng rng(static_cast<std::uint32_t>(seed));
    FoldSplit split;
    split.k = k;
    split.seed = seed;
    split.folds.assign(k, {});
    for (int c = 0; c < d.n_classes; ++c) {
        std::vector<int> idx;
        for (int i = 0; i < static_cast<int>(d.samples.size()); ++i)
            if (d.samples[i].label == c) idx.push_back(i);
        if (static_cast<int>(idx.size()) < k)
            throw std::invalid_argument("kfold: class " + std::to_string(c) +
                                        " has fewer than k samples");
        shuffle(idx, rng);
        for (std::size_t t = 0; t < idx.size(); ++t)
            split.folds[(t + c) % k].push_back(idx[t]);
    }
    for (auto& f : split.folds) std::sort(f.begin(), f.end());
    return split;
}

/// Fold assignments as CSV (sample_index, fold_id), ascending sample index.
inline std::string folds_to_csv(const FoldSplit& split) {
    std::vector<std::pair<int, int>> rows;
    for (int f = 0; f < split.k; ++f)
        for (int i : split.folds[f]) rows.emplace_back(i, f);
    std::sort(rows.begin(), rows.end());
    std::ostringstream out;
    out << "sample_index,fold_id\n";
    for (auto [i, f] : rows) out << i << "," << f << "\n";
    return out.str();
}

}  // namespace apnn
