#pragma once

// Behavioral model of the analog signal chain: weights mapped to
// conductances, sequential column reads producing currents, a
// current-to-voltage stage, comparators with calibrated thresholds, ideal
// storage/averaging, and a reference-gated winner-takes-all — with seeded
// device-variation injection and a full per-column trace.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"
#include "threshold_logic.hpp"

namespace apnn {

/// Comparator threshold calibration. Ideal places the firing boundary
/// exactly at the algorithmic one (1 - theta volts), keeping the analog
/// chain behaviorally identical to the digital classifier. CircuitAnchored
/// applies a slope-1 affine offset of -0.3 V (clamped at 0), modeling a
/// comparator whose reference must be programmed 0.3 V below the ideal
/// boundary.
enum class Calibration { Ideal, CircuitAnchored };

struct ElectricalConfig {
    double r_ivc = 200000.0;          // IVC feedback resistance, ohms
    double g_unit = 1.0 / 200000.0;   // conductance per unit weight, siemens
    double v_scale = 1.0;             // input volts per unit feature
    double vref_wta = 0.3;            // WTA gate reference, volts
    Calibration calibration = Calibration::Ideal;
    double variation_sigma = 0.0;     // relative conductance std-dev
    long long seed = 0;

    void validate() const {
        if (!(r_ivc > 0.0))
            throw std::invalid_argument("ElectricalConfig: r_ivc must be > 0");
        if (!(g_unit > 0.0))
            throw std::invalid_argument("ElectricalConfig: g_unit must be > 0");
        if (!(v_scale > 0.0))
            throw std::invalid_argument("ElectricalConfig: v_scale must be > 0");
        if (variation_sigma < 0.0)
            throw std::invalid_argument(
                "ElectricalConfig: variation_sigma must be >= 0");
    }
};

/// One sequential column read: time step, owning class, column index within
/// the class, read current, IVC output voltage, comparator bit.
struct ColumnRecord {
    int step = 0;
    int class_id = 0;
    int column = 0;
    double current_a = 0.0;
    double v_ivc = 0.0;
    int bit = 0;
};

/// Recorded signals of one inference: one record per stored column in read
/// order (ascending class id, then column index), the per-class mean
/// comparator voltage, and the WTA output volts per class.
struct AnalogTrace {
    std::vector<ColumnRecord> records;
    std::vector<double> mean_v;
    std::vector<double> wta_v;
};

/// Linear weight-to-conductance mapping: q * g_unit. q must be in [0, 1].
inline double weight_to_conductance(double q, const ElectricalConfig& cfg) {
    if (!(q >= 0.0) || q > 1.0)
        throw std::invalid_argument(
            "weight_to_conductance: weight outside [0, 1]");
    return q * cfg.g_unit;
}

/// Selected column's read current: sum over rows of (x_r * v_scale) * G_r.
inline double column_current(const std::vector<double>& x,
                             const std::vector<double>& conductances,
                             const ElectricalConfig& cfg) {
    if (x.size() != conductances.size())
        throw std::invalid_argument("column_current: length mismatch");
    double i = 0.0;
    for (std::size_t r = 0; r < x.size(); ++r)
        i += (x[r] * cfg.v_scale) * conductances[r];
    return i;
}

/// IVC output: i * r_ivc. With the default g_unit = 1/r_ivc and v_scale = 1
/// this equals the dot product x.w in volts.
inline double ivc_voltage(double i, const ElectricalConfig& cfg) {
    return i * cfg.r_ivc;
}

/// Comparator threshold voltage for a firing tolerance theta. Ideal: the
/// ideal boundary 1 - theta. CircuitAnchored: (1 - theta) - 0.3, clamped
/// at 0.
inline double map_theta_to_vth(double theta, const ElectricalConfig& cfg) {
    if (!(theta > 0.0) || theta > 1.0)
        throw std::invalid_argument("map_theta_to_vth: theta must be in (0, 1]");
    const double ideal = 1.0 - theta;
    if (cfg.calibration == Calibration::Ideal) return ideal;
    return std::max(0.0, ideal - 0.3);
}

/// 1 iff v > vth (strict).
inline int comparator(double v, double vth) { return v > vth ? 1 : 0; }

/// Multiplicative conductance variation: every G becomes G * (1 + eps) with
/// eps ~ N(0, variation_sigma) drawn from `rng` in (class, column, row)
/// order, clamped to [0, g_unit]. With variation_sigma = 0 the input is
/// returned untouched and the generator is not consumed.
inline std::vector<std::vector<std::vector<double>>> inject_variation(
    const std::vector<std::vector<std::vector<double>>>& conductances,
    const ElectricalConfig& cfg, Rng& rng) {
    cfg.validate();
    if (cfg.variation_sigma == 0.0) return conductances;
    auto out = conductances;
    for (auto& crossbar : out)
        for (auto& column : crossbar)
            for (double& g : column) {
                g *= (1.0 + cfg.variation_sigma * rng.gaussian());
                g = std::min(std::max(g, 0.0), cfg.g_unit);
            }
    return out;
}

/// Convenience overload drawing from a generator derived from (cfg.seed, 0);
/// identical seeds give identical perturbations.
inline std::vector<std::vector<std::vector<double>>> inject_variation(
    const std::vector<std::vector<std::vector<double>>>& conductances,
    const ElectricalConfig& cfg) {
    Rng rng(Rng::mix_seed(static_cast<std::uint64_t>(cfg.seed), 0));
    return inject_variation(conductances, cfg, rng);
}

/// Reference-gated winner-takes-all: class c outputs 1.0 V iff its mean
/// comparator voltage is both >= vref_wta and the argmax (lowest-index
/// tie-break); every other class outputs 0.0 V. All-below-reference input
/// yields all zeros.
inline std::vector<double> wta_analog(const std::vector<double>& mean_voltages,
                                      const ElectricalConfig& cfg) {
    if (mean_voltages.empty())
        throw std::invalid_argument("wta_analog: empty input");
    const int am = argmax_lowest(mean_voltages);
    std::vector<double> out(mean_voltages.size(), 0.0);
    if (mean_voltages[am] >= cfg.vref_wta) out[am] = 1.0;
    return out;
}

/// Full analog inference: map every stored weight to a conductance, perturb
/// (when variation_sigma > 0) with a generator derived from
/// (cfg.seed, sample_index), read each column sequentially through current,
/// IVC, and comparator stages using that class's calibrated threshold,
/// average the comparator outputs per class, and gate through the WTA.
/// Returns the Prediction (class = argmax of mean voltages, mirroring the
/// digital classifier; activated = any column fired) and the complete trace.
inline std::pair<Prediction, AnalogTrace> analog_forward(
    const ApnnModel& m, const std::vector<double>& x,
    const ElectricalConfig& cfg, long long sample_index = 0) {
    cfg.validate();
    const int n_classes = static_cast<int>(m.class_crossbars.size());
    if (n_classes == 0)
        throw std::invalid_argument("analog_forward: model has no classes");
    m.policy.validate(n_classes);

    std::vector<std::vector<std::vector<double>>> conductances(n_classes);
    for (int c = 0; c < n_classes; ++c) {
        conductances[c].resize(m.class_crossbars[c].size());
        for (std::size_t j = 0; j < m.class_crossbars[c].size(); ++j) {
            const auto& col = m.class_crossbars[c][j];
            if (col.size() != x.size())
                throw std::invalid_argument(
                    "analog_forward: column/input length mismatch");
            auto& g = conductances[c][j];
            g.resize(col.size());
            for (std::size_t r = 0; r < col.size(); ++r)
                g[r] = weight_to_conductance(col[r], cfg);
        }
    }

    Rng rng(Rng::mix_seed(static_cast<std::uint64_t>(cfg.seed),
                          static_cast<std::uint64_t>(sample_index)));
    conductances = inject_variation(conductances, cfg, rng);

    AnalogTrace trace;
    trace.mean_v.resize(n_classes);
    int step = 0;
    for (int c = 0; c < n_classes; ++c) {
        const double vth = map_theta_to_vth(m.policy.theta_for(c), cfg);
        const auto& crossbar = conductances[c];
        if (crossbar.empty())
            throw std::invalid_argument("analog_forward: empty crossbar");
        int fired = 0;
        for (std::size_t j = 0; j < crossbar.size(); ++j) {
            ColumnRecord rec;
            rec.step = step++;
            rec.class_id = c;
            rec.column = static_cast<int>(j);
            rec.current_a = column_current(x, crossbar[j], cfg);
            rec.v_ivc = ivc_voltage(rec.current_a, cfg);
            rec.bit = comparator(rec.v_ivc, vth);
            fired += rec.bit;
            trace.records.push_back(rec);
        }
        trace.mean_v[c] =
            static_cast<double>(fired) / static_cast<double>(crossbar.size());
    }
    trace.wta_v = wta_analog(trace.mean_v, cfg);

    Prediction p;
    p.scores = trace.mean_v;
    p.class_id = argmax_lowest(trace.mean_v);
    for (double s : p.scores)
        if (s > 0.0) { p.activated = true; break; }
    return {p, trace};
}

/// Trace CSV: header `step,class,column,current_A,v_ivc_V,comp_bit`, one row
/// per column record in read order, then one row per class carrying
/// `class,mean_v_V,wta_V`. Floats use scientific notation with 9 significant
/// digits; the decimal separator is always '.'.
inline std::string trace_to_csv(const AnalogTrace& trace) {
    auto sci = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.8e", v);
        return std::string(buf);
    };
    std::string out = "step,class,column,current_A,v_ivc_V,comp_bit\n";
    for (const auto& r : trace.records) {
        out += std::to_string(r.step) + "," + std::to_string(r.class_id) + "," +
               std::to_string(r.column) + "," + sci(r.current_a) + "," +
               sci(r.v_ivc) + "," + std::to_string(r.bit) + "\n";
    }
    for (std::size_t c = 0; c < trace.mean_v.size(); ++c)
        out += std::to_string(c) + "," + sci(trace.mean_v[c]) + "," +
               sci(trace.wta_v[c]) + "\n";
    return out;
}

}  // namespace apnn
