#pragma once

// Power and on-chip-area estimator for an N-class deployment: four
// components replicated per class (crossbar, current buffer, IVC,
// comparator) plus one shared winner-takes-all stage.

#include <stdexcept>
#include <string>
#include <vector>

namespace apnn {

/// One hardware component's unit cost. per_class components are instantiated
/// once per class; the rest (the WTA) appear exactly once.
struct ComponentCost {
    std::string name;
    double power_w = 0.0;
    double area_um2 = 0.0;
    bool per_class = true;
};

/// Default component table. Power in watts, area in square micrometers.
inline std::vector<ComponentCost> default_cost_table() {
    return {
        {"crossbar", 5e-6, 1.36, true},
        {"current_buffer", 149e-6, 280.0, true},
        {"ivc", 41.1e-3, 1638.7, true},
        {"comparator", 17e-9, 0.5183, true},
        {"wta", 47.34e-12, 1.555, false},
    };
}

struct CostReport {
    int n_classes = 0;
    /// Scaled component subtotals: per-class entries carry n_classes times
    /// their unit cost, the WTA its unit cost once.
    std::vector<ComponentCost> subtotals;
    double total_power_w = 0.0;
    double total_area_um2 = 0.0;
};

/// Cost of an n-class deployment:
///   total = n * (crossbar + current_buffer + ivc + comparator) + wta
/// for power and area alike. The table must contain each of the five
/// components exactly once (duplicates or omissions are errors); custom
/// component values are allowed for what-if sweeps.
inline CostReport estimate(int n_classes,
                           const std::vector<ComponentCost>& table =
                               default_cost_table()) {
    if (n_classes < 0)
        throw std::invalid_argument("estimate: n_classes must be >= 0");
    static const char* kNames[] = {"crossbar", "current_buffer", "ivc",
                                   "comparator", "wta"};
    std::vector<const ComponentCost*> ordered(5, nullptr);
    for (const auto& c : table) {
        int slot = -1;
        for (int i = 0; i < 5; ++i)
            if (c.name == kNames[i]) slot = i;
        if (slot < 0)
            throw std::invalid_argument("estimate: unknown component '" +
                                        c.name + "'");
        if (ordered[slot])
            throw std::invalid_argument("estimate: duplicate component '" +
                                        c.name + "'");
        if (c.power_w < 0.0 || c.area_um2 < 0.0)
            throw std::invalid_argument("estimate: negative cost for '" +
                                        c.name + "'");
        ordered[slot] = &c;
    }
    for (int i = 0; i < 5; ++i)
        if (!ordered[i])
            throw std::invalid_argument(std::string("estimate: missing component '") +
                                        kNames[i] + "'");

    CostReport r;
    r.n_classes = n_classes;
    const double n = static_cast<double>(n_classes);
    double per_class_power = 0.0, per_class_area = 0.0;
    double once_power = 0.0, once_area = 0.0;
    for (int i = 0; i < 5; ++i) {
        const ComponentCost& c = *ordered[i];
        if (c.per_class) {
            per_class_power += c.power_w;
            per_class_area += c.area_um2;
            r.subtotals.push_back({c.name, n * c.power_w, n * c.area_um2, true});
        } else {
            once_power += c.power_w;
            once_area += c.area_um2;
            r.subtotals.push_back({c.name, c.power_w, c.area_um2, false});
        }
    }
    r.total_power_w = n * per_class_power + once_power;
    r.total_area_um2 = n * per_class_area + once_area;
    return r;
}

}  // namespace apnn
