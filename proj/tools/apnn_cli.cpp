// Command-line front end: cross-validation reports, analog trace emission,
// parameter sweeps, and cost reports. Every command is deterministic for a
// fixed configuration; output files are written atomically and embed (or are
// accompanied by) the fully resolved run configuration so any result can be
// reproduced from its own output.
//
// Flag precedence: command line > --config JSON file > built-in defaults.
// Exit codes: 0 success; CLI11 usage errors return its nonzero codes; any
// runtime failure exits 2 with a message naming the failing stage.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "apnn/apnn.hpp"

using json = nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------------------
// Resolved run configuration (flags over config file over defaults).

struct RunConfig {
    std::string command;
    std::string data;
    std::string out;
    long long seed = 42;
    std::string method = "pnn";
    int k = 5;
    apnn::QuantizerSpec quantizer{};
    apnn::ElectricalConfig electrical{};
    // trace
    int trace_sample = 142;
    int trace_per_class = 10;
    double trace_theta = 0.025;
    // sweep
    std::string sweep_param;
    std::vector<double> sweep_values;
    int sweep_seeds = 20;
    // cost
    int cost_classes = 3;
};

std::string calibration_name(apnn::Calibration c) {
    return c == apnn::Calibration::Ideal ? "ideal" : "circuit-anchored";
}

apnn::Calibration parse_calibration(const std::string& s) {
    if (s == "ideal") return apnn::Calibration::Ideal;
    if (s == "circuit-anchored") return apnn::Calibration::CircuitAnchored;
    throw std::invalid_argument("unknown calibration '" + s +
                                "' (expected ideal or circuit-anchored)");
}

json config_to_json(const RunConfig& rc) {
    json j;
    j["command"] = rc.command;
    j["data"] = rc.data;
    j["out"] = rc.out;
    j["seed"] = rc.seed;
    if (rc.command == "cv" || rc.command == "sweep") {
        j["method"] = rc.method;
        j["k"] = rc.k;
    }
    j["quantizer"] = {{"n_levels", rc.quantizer.n_levels},
                      {"range_lo", rc.quantizer.range_lo},
                      {"range_hi", rc.quantizer.range_hi}};
    j["electrical"] = {{"r_ivc", rc.electrical.r_ivc},
                       {"g_unit", rc.electrical.g_unit},
                       {"v_scale", rc.electrical.v_scale},
                       {"vref_wta", rc.electrical.vref_wta},
                       {"calibration", calibration_name(rc.electrical.calibration)},
                       {"variation_sigma", rc.electrical.variation_sigma},
                       {"seed", rc.electrical.seed}};
    if (rc.command == "trace")
        j["trace"] = {{"sample", rc.trace_sample},
                      {"per_class", rc.trace_per_class},
                      {"theta", rc.trace_theta}};
    if (rc.command == "sweep")
        j["sweep"] = {{"param", rc.sweep_param},
                      {"values", rc.sweep_values},
                      {"n_seeds", rc.sweep_seeds}};
    if (rc.command == "cost") j["cost"] = {{"classes", rc.cost_classes}};
    return j;
}

// ---------------------------------------------------------------------------
// Atomic file output: write to a temp sibling, then rename over the target.

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out)
            throw std::runtime_error("cannot open '" + tmp + "' for writing");
        out << content;
        if (!out)
            throw std::runtime_error("write failed on '" + tmp + "'");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("cannot rename '" + tmp + "' to '" + path + "'");
}

std::string sci9(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.8e", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Config-file layering. Each option takes the flag when given, else the
// config-file value when present, else the built-in default already in `rc`.

class Layered {
public:
    explicit Layered(const json& file_cfg) : cfg_(file_cfg) {}

    template <typename T>
    void merge(const CLI::Option* flag, const T& flag_value,
               std::initializer_list<const char*> path, T& out) const {
        if (flag && flag->count() > 0) {
            out = flag_value;
            return;
        }
        const json* node = &cfg_;
        for (const char* key : path) {
            if (!node->is_object() || !node->contains(key)) return;
            node = &(*node)[key];
        }
        out = node->get<T>();
    }

private:
    const json& cfg_;
};

json load_config_file(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw std::invalid_argument("malformed config '" + path +
                                    "': " + e.what());
    }
    if (!j.is_object())
        throw std::invalid_argument("config '" + path +
                                    "' must be a JSON object");
    return j;
}

// ---------------------------------------------------------------------------
// Shared report fragments.

json cv_report_json(const apnn::CvReport& rep, const apnn::Dataset& d,
                    const RunConfig& rc) {
    json j;
    j["report"] = "cv";
    j["method"] = apnn::method_name(rep.method);
    j["k"] = rep.k;
    j["seed"] = rep.seed;
    json fold_acc = json::array();
    for (const auto& f : rep.folds) fold_acc.push_back(f.accuracy);
    j["fold_accuracies"] = fold_acc;
    j["mean_accuracy"] = rep.mean_accuracy;
    if (apnn::method_is_pnn(rep.method)) {
        json sig = json::array();
        for (const auto& f : rep.folds) sig.push_back(*f.sigma);
        j["sigma_per_fold"] = sig;
    } else {
        json th = json::array();
        for (const auto& f : rep.folds) {
            if (f.thetas.size() == 1)
                th.push_back(f.thetas[0]);
            else
                th.push_back(f.thetas);
        }
        j["theta_per_fold"] = th;
    }
    json conf = json::array();
    for (const auto& f : rep.folds) conf.push_back(f.confusion);
    j["confusion_per_fold"] = conf;
    j["confusion_total"] = rep.confusion_total;
    j["label_names"] = d.label_names;
    j["config"] = config_to_json(rc);
    return j;
}

// ---------------------------------------------------------------------------
// Commands.

int cmd_cv(const RunConfig& rc, const std::string& folds_out) {
    const apnn::Dataset d = apnn::load_csv(rc.data);
    const apnn::Method method = apnn::parse_method(rc.method);
    apnn::CvOptions opt;
    opt.quantizer = rc.quantizer;
    const apnn::CvReport rep =
        apnn::cross_validate(d, method, rc.k, rc.seed, opt);
    write_file_atomic(rc.out, cv_report_json(rep, d, rc).dump(1) + "\n");
    if (!folds_out.empty())
        write_file_atomic(folds_out,
                          apnn::folds_to_csv(apnn::kfold(d, rc.k, rc.seed)));
    return 0;
}

int cmd_trace(const RunConfig& rc) {
    const apnn::Dataset d = apnn::load_csv(rc.data);
    const int n = static_cast<int>(d.samples.size());
    if (rc.trace_sample < 0 || rc.trace_sample >= n)
        throw std::invalid_argument("trace: sample index " +
                                    std::to_string(rc.trace_sample) +
                                    " out of range [0, " + std::to_string(n) +
                                    ")");
    if (rc.trace_per_class < 1)
        throw std::invalid_argument("trace: per-class count must be >= 1");

    // Stored columns: the first per-class samples in file order, skipping
    // the probe itself so it is classified against independent weights.
    apnn::ApnnModel model;
    model.quantizer = rc.quantizer;
    model.quantized = true;
    model.policy.kind = apnn::PolicyKind::Fixed;
    model.policy.theta = rc.trace_theta;
    model.class_crossbars.assign(d.n_classes, {});
    for (int c = 0; c < d.n_classes; ++c) {
        for (int i = 0; i < n; ++i) {
            if (d.samples[i].label != c || i == rc.trace_sample) continue;
            if (static_cast<int>(model.class_crossbars[c].size()) >=
                rc.trace_per_class)
                break;
            model.class_crossbars[c].push_back(apnn::quantize_vector(
                apnn::unit_normalize(d.samples[i].features, i), rc.quantizer));
        }
        if (static_cast<int>(model.class_crossbars[c].size()) <
            rc.trace_per_class)
            throw std::invalid_argument(
                "trace: class " + std::to_string(c) + " has fewer than " +
                std::to_string(rc.trace_per_class) + " samples available");
    }

    const auto x =
        apnn::unit_normalize(d.samples[rc.trace_sample].features, rc.trace_sample);
    apnn::ElectricalConfig cfg = rc.electrical;
    const auto [pred, trace] =
        apnn::analog_forward(model, x, cfg, rc.trace_sample);
    write_file_atomic(rc.out, apnn::trace_to_csv(trace));
    write_file_atomic(rc.out + ".run.json", config_to_json(rc).dump(1) + "\n");
    (void)pred;
    return 0;
}

int cmd_sweep(const RunConfig& rc) {
    const apnn::Dataset d = apnn::load_csv(rc.data);
    const apnn::Method method = apnn::parse_method(rc.method);
    if (rc.sweep_values.empty())
        throw std::invalid_argument("sweep: empty value list");

    std::ostringstream csv;
    csv << "value,mean_accuracy,std_accuracy\n";
    for (double value : rc.sweep_values) {
        double mean = 0.0, stddev = 0.0;
        if (rc.sweep_param == "theta") {
            if (apnn::method_is_pnn(method))
                throw std::invalid_argument(
                    "sweep: theta sweep needs a threshold method");
            apnn::CvOptions opt;
            opt.quantizer = rc.quantizer;
            opt.forced_theta = value;
            mean = apnn::cross_validate(d, method, rc.k, rc.seed, opt)
                       .mean_accuracy;
        } else if (rc.sweep_param == "n_levels") {
            if (!apnn::method_quantized(method))
                throw std::invalid_argument(
                    "sweep: n_levels sweep needs a quantized method");
            const double rounded = std::floor(value + 0.5);
            if (rounded < 2.0 || rounded != value)
                throw std::invalid_argument(
                    "sweep: n_levels values must be integers >= 2");
            apnn::CvOptions opt;
            opt.quantizer = rc.quantizer;
            opt.quantizer.n_levels = static_cast<int>(rounded);
            mean = apnn::cross_validate(d, method, rc.k, rc.seed, opt)
                       .mean_accuracy;
        } else if (rc.sweep_param == "variation_sigma") {
            if (apnn::method_is_pnn(method))
                throw std::invalid_argument(
                    "sweep: variation_sigma sweep needs a threshold method");
            if (value < 0.0)
                throw std::invalid_argument(
                    "sweep: variation_sigma must be >= 0");
            // Folds and training stay pinned to the base seed; the extra
            // seeds drive the conductance-variation draws only.
            std::vector<double> accs;
            for (int s = 0; s < rc.sweep_seeds; ++s) {
                apnn::CvOptions opt;
                opt.quantizer = rc.quantizer;
                opt.analog_eval = true;
                opt.electrical = rc.electrical;
                opt.electrical.variation_sigma = value;
                opt.electrical.seed = rc.seed + s;
                accs.push_back(
                    apnn::cross_validate(d, method, rc.k, rc.seed, opt)
                        .mean_accuracy);
            }
            // Welford's running mean/variance: exact for a constant
            // sequence, so a zero-variation sweep row reproduces the
            // noiseless accuracy bit-for-bit.
            double m2 = 0.0;
            mean = 0.0;
            for (std::size_t i = 0; i < accs.size(); ++i) {
                const double delta = accs[i] - mean;
                mean += delta / static_cast<double>(i + 1);
                m2 += delta * (accs[i] - mean);
            }
            stddev = std::sqrt(m2 / static_cast<double>(accs.size()));
        } else {
            throw std::invalid_argument("sweep: unknown parameter '" +
                                        rc.sweep_param + "'");
        }
        csv << sci9(value) << "," << sci9(mean) << "," << sci9(stddev) << "\n";
    }
    write_file_atomic(rc.out, csv.str());
    write_file_atomic(rc.out + ".run.json", config_to_json(rc).dump(1) + "\n");
    return 0;
}

int cmd_cost(const RunConfig& rc, const std::vector<std::string>& overrides) {
    auto table = apnn::default_cost_table();
    for (const std::string& ov : overrides) {
        // name:power_W:area_um2
        const auto p1 = ov.find(':');
        const auto p2 = ov.find(':', p1 == std::string::npos ? p1 : p1 + 1);
        if (p1 == std::string::npos || p2 == std::string::npos)
            throw std::invalid_argument(
                "cost: malformed override '" + ov +
                "' (expected name:power_W:area_um2)");
        const std::string name = ov.substr(0, p1);
        double power, area;
        try {
            power = std::stod(ov.substr(p1 + 1, p2 - p1 - 1));
            area = std::stod(ov.substr(p2 + 1));
        } catch (const std::exception&) {
            throw std::invalid_argument("cost: malformed override '" + ov + "'");
        }
        bool found = false;
        for (auto& c : table)
            if (c.name == name) {
                c.power_w = power;
                c.area_um2 = area;
                found = true;
            }
        if (!found)
            throw std::invalid_argument("cost: unknown component '" + name + "'");
    }
    const apnn::CostReport rep = apnn::estimate(rc.cost_classes, table);
    json j;
    j["report"] = "cost";
    j["n_classes"] = rep.n_classes;
    json comps = json::array();
    for (const auto& c : rep.subtotals)
        comps.push_back({{"name", c.name},
                         {"power_W", c.power_w},
                         {"area_um2", c.area_um2},
                         {"per_class", c.per_class}});
    j["components"] = comps;
    j["total_power_W"] = rep.total_power_w;
    j["total_power_mW"] = rep.total_power_w * 1e3;
    j["total_area_um2"] = rep.total_area_um2;
    j["config"] = config_to_json(rc);
    write_file_atomic(rc.out, j.dump(1) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Approximate probabilistic classifier simulator"};
    app.require_subcommand(1);

    // Raw flag storage; merged with the config file after parsing.
    std::string f_data, f_out, f_config, f_method, f_calibration, f_param;
    std::string f_folds_out, f_values;
    long long f_seed = 0;
    int f_k = 0, f_sample = 0, f_per_class = 0, f_levels = 0, f_classes = 0;
    double f_theta = 0, f_vsigma = 0, f_rivc = 0, f_gunit = 0, f_vscale = 0,
           f_vref = 0;
    std::vector<std::string> f_overrides;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--data", f_data, "Dataset CSV path");
        sub->add_option("--out", f_out, "Output file path");
        sub->add_option("--seed", f_seed, "Base random seed");
        sub->add_option("--config", f_config, "JSON config file");
        sub->add_option("--n-levels", f_levels, "Quantizer level count");
    };
    auto add_electrical = [&](CLI::App* sub) {
        sub->add_option("--r-ivc", f_rivc, "IVC feedback resistance (ohms)");
        sub->add_option("--g-unit", f_gunit, "Conductance per unit weight (S)");
        sub->add_option("--v-scale", f_vscale, "Input volts per unit feature");
        sub->add_option("--vref", f_vref, "WTA reference voltage");
        sub->add_option("--calibration", f_calibration,
                        "Comparator calibration: ideal | circuit-anchored")
            ->check(CLI::IsMember({"ideal", "circuit-anchored"}));
        sub->add_option("--variation-sigma", f_vsigma,
                        "Relative conductance variation std-dev");
    };

    CLI::App* cv = app.add_subcommand("cv", "Cross-validation accuracy report");
    add_common(cv);
    cv->add_option("--method", f_method,
                   "pnn | pnn-q | apnn-fixed | apnn-fixed-q | apnn-adaptive-q");
    cv->add_option("--k", f_k, "Fold count");
    cv->add_option("--folds-out", f_folds_out,
                   "Also export fold assignments CSV here");

    CLI::App* trace = app.add_subcommand("trace", "Analog trace of one inference");
    add_common(trace);
    add_electrical(trace);
    trace->add_option("--sample", f_sample, "Probe sample index");
    trace->add_option("--per-class", f_per_class,
                      "Stored columns per class (default 10)");
    trace->add_option("--theta", f_theta, "Firing tolerance (default 0.025)");

    CLI::App* sweep = app.add_subcommand("sweep", "Accuracy sweep CSV");
    add_common(sweep);
    add_electrical(sweep);
    sweep->add_option("--param", f_param, "theta | variation_sigma | n_levels")
        ->check(CLI::IsMember({"theta", "variation_sigma", "n_levels"}));
    sweep->add_option("--values", f_values, "Comma-separated value list");
    sweep->add_option("--method", f_method, "Classifier variant to sweep");
    sweep->add_option("--k", f_k, "Fold count");

    CLI::App* cost = app.add_subcommand("cost", "Power/area cost report");
    add_common(cost);
    cost->add_option("--classes", f_classes, "Deployed class count");
    cost->add_option("--override", f_overrides,
                     "Component override name:power_W:area_um2 (repeatable)");

    CLI11_PARSE(app, argc, argv);
    CLI::App* sub = app.get_subcommands().front();

    try {
        const json file_cfg = load_config_file(f_config);
        const Layered lay(file_cfg);
        RunConfig rc;
        rc.command = sub->get_name();
        if (rc.command == "cv") rc.out = "cv_report.json";
        if (rc.command == "trace") rc.out = "trace.csv";
        if (rc.command == "sweep") rc.out = "sweep.csv";
        if (rc.command == "cost") rc.out = "cost_report.json";
        if (rc.command == "sweep") rc.method = "apnn-fixed";

        lay.merge(sub->get_option_no_throw("--data"), f_data, {"data"}, rc.data);
        lay.merge(sub->get_option_no_throw("--out"), f_out, {"out"}, rc.out);
        lay.merge(sub->get_option_no_throw("--seed"), f_seed, {"seed"}, rc.seed);
        lay.merge(sub->get_option_no_throw("--method"), f_method, {"method"},
                  rc.method);
        lay.merge(sub->get_option_no_throw("--k"), f_k, {"k"}, rc.k);
        lay.merge(sub->get_option_no_throw("--n-levels"), f_levels,
                  {"quantizer", "n_levels"}, rc.quantizer.n_levels);
        lay.merge(nullptr, 0.0, {"quantizer", "range_lo"}, rc.quantizer.range_lo);
        lay.merge(nullptr, 0.0, {"quantizer", "range_hi"}, rc.quantizer.range_hi);

        // Electrical: when r_ivc is set without g_unit, keep the 1/R tie so
        // IVC volts equal the dot product.
        const CLI::Option* o_rivc = sub->get_option_no_throw("--r-ivc");
        const CLI::Option* o_gunit = sub->get_option_no_throw("--g-unit");
        lay.merge(o_rivc, f_rivc, {"electrical", "r_ivc"}, rc.electrical.r_ivc);
        const bool gunit_given =
            (o_gunit && o_gunit->count() > 0) ||
            (file_cfg.contains("electrical") &&
             file_cfg["electrical"].is_object() &&
             file_cfg["electrical"].contains("g_unit"));
        if (gunit_given)
            lay.merge(o_gunit, f_gunit, {"electrical", "g_unit"},
                      rc.electrical.g_unit);
        else
            rc.electrical.g_unit = 1.0 / rc.electrical.r_ivc;
        lay.merge(sub->get_option_no_throw("--v-scale"), f_vscale,
                  {"electrical", "v_scale"}, rc.electrical.v_scale);
        lay.merge(sub->get_option_no_throw("--vref"), f_vref,
                  {"electrical", "vref_wta"}, rc.electrical.vref_wta);
        std::string cal = calibration_name(rc.electrical.calibration);
        lay.merge(sub->get_option_no_throw("--calibration"), f_calibration,
                  {"electrical", "calibration"}, cal);
        rc.electrical.calibration = parse_calibration(cal);
        lay.merge(sub->get_option_no_throw("--variation-sigma"), f_vsigma,
                  {"electrical", "variation_sigma"},
                  rc.electrical.variation_sigma);
        rc.electrical.seed = rc.seed;

        lay.merge(sub->get_option_no_throw("--sample"), f_sample,
                  {"trace", "sample"}, rc.trace_sample);
        lay.merge(sub->get_option_no_throw("--per-class"), f_per_class,
                  {"trace", "per_class"}, rc.trace_per_class);
        lay.merge(sub->get_option_no_throw("--theta"), f_theta,
                  {"trace", "theta"}, rc.trace_theta);

        lay.merge(sub->get_option_no_throw("--param"), f_param,
                  {"sweep", "param"}, rc.sweep_param);
        std::vector<double> values;
        if (sub->get_option_no_throw("--values") &&
            sub->get_option_no_throw("--values")->count() > 0) {
            std::stringstream ss(f_values);
            std::string tok;
            while (std::getline(ss, tok, ',')) {
                try {
                    values.push_back(std::stod(tok));
                } catch (const std::exception&) {
                    throw std::invalid_argument("sweep: bad value '" + tok + "'");
                }
            }
            rc.sweep_values = values;
        } else if (file_cfg.contains("sweep") &&
                   file_cfg["sweep"].is_object() &&
                   file_cfg["sweep"].contains("values")) {
            rc.sweep_values =
                file_cfg["sweep"]["values"].get<std::vector<double>>();
        }
        lay.merge(nullptr, 0, {"sweep", "n_seeds"}, rc.sweep_seeds);

        lay.merge(sub->get_option_no_throw("--classes"), f_classes,
                  {"cost", "classes"}, rc.cost_classes);

        rc.quantizer.validate();
        rc.electrical.validate();
        if (rc.k < 2) throw std::invalid_argument("k must be >= 2");
        if (rc.command != "cost" && rc.data.empty())
            throw std::invalid_argument("missing --data (or config 'data')");
        if (rc.command == "cv") {
            const CLI::Option* m = sub->get_option_no_throw("--method");
            if ((!m || m->count() == 0) && !file_cfg.contains("method"))
                throw std::invalid_argument(
                    "missing --method (or config 'method')");
        }
        if (rc.command == "sweep" && rc.sweep_param.empty())
            throw std::invalid_argument("missing --param (or config 'sweep.param')");

        if (rc.command == "cv") return cmd_cv(rc, f_folds_out);
        if (rc.command == "trace") return cmd_trace(rc);
        if (rc.command == "sweep") return cmd_sweep(rc);
        return cmd_cost(rc, f_overrides);
    } catch (const std::exception& e) {
        std::cerr << "error (" << sub->get_name() << "): " << e.what() << "\n";
        return 2;
    }
}
