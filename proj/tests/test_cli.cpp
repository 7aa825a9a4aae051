#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace {

using json = nlohmann::ordered_json;

const std::string kCli = APNN_CLI_PATH;
const std::string kIris = std::string(APNN_DATA_DIR) + "/iris.csv";

int run(const std::string& args, bool quiet = false) {
    std::string cmd = kCli + " " + args;
    if (quiet) cmd += " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) lines.push_back(line);
    return lines;
}

}  // namespace

TEST_CASE("cv report carries the frozen accuracies and resolved config",
          "[cli]") {
    REQUIRE(run("cv --data " + kIris + " --method pnn --out cli_cv.json") == 0);
    const json j = json::parse(slurp("cli_cv.json"));
    REQUIRE(j["method"] == "pnn");
    REQUIRE(j["k"] == 5);
    REQUIRE(j["seed"] == 42);
    REQUIRE(j["mean_accuracy"].get<double>() == 0.9733333333333334);
    REQUIRE(j["sigma_per_fold"] ==
            json::array({0.01, 0.01, 0.01, 0.02, 0.02}));
    REQUIRE(j["fold_accuracies"].size() == 5);
    REQUIRE(j["confusion_total"].size() == 3);
    REQUIRE(j["label_names"].size() == 3);
    // The embedded config must round-trip every resolved knob.
    REQUIRE(j["config"]["command"] == "cv");
    REQUIRE(j["config"]["seed"] == 42);
    REQUIRE(j["config"]["quantizer"]["n_levels"] == 16);
    REQUIRE(j["config"]["electrical"]["r_ivc"] == 200000.0);
    std::remove("cli_cv.json");
}

TEST_CASE("reruns are byte-identical", "[cli]") {
    const std::string cmd =
        "cv --data " + kIris + " --method apnn-fixed-q --out cli_det.json";
    REQUIRE(run(cmd) == 0);
    const std::string first = slurp("cli_det.json");
    REQUIRE(run(cmd) == 0);
    REQUIRE(slurp("cli_det.json") == first);
    const json j = json::parse(first);
    REQUIRE(j["mean_accuracy"].get<double>() == 0.6666666666666666);
    std::remove("cli_det.json");
}

TEST_CASE("fold assignments export alongside the report", "[cli]") {
    REQUIRE(run("cv --data " + kIris +
                " --method pnn --out cli_cvf.json --folds-out cli_folds.csv") ==
            0);
    const auto lines = lines_of(slurp("cli_folds.csv"));
    REQUIRE(lines.size() == 151);
    REQUIRE(lines[0] == "sample_index,fold_id");
    REQUIRE(lines[1] == "0,4");
    std::remove("cli_cvf.json");
    std::remove("cli_folds.csv");
}

TEST_CASE("usage and data errors exit nonzero", "[cli]") {
    REQUIRE(run("cv --data " + kIris + " --method bogus --out x.json", true) !=
            0);
    REQUIRE(run("cv --data no_such.csv --method pnn --out x.json", true) == 2);
    REQUIRE(run("cv --data " + kIris + " --out x.json", true) == 2);
    REQUIRE(run("sweep --data " + kIris + " --values 1,2 --out x.csv", true) ==
            2);  // missing --param
}

TEST_CASE("trace emits the demonstration inference", "[cli]") {
    REQUIRE(run("trace --data " + kIris + " --out cli_trace.csv") == 0);
    const auto lines = lines_of(slurp("cli_trace.csv"));
    REQUIRE(lines.size() == 34);  // header + 30 records + 3 summary rows
    REQUIRE(lines[0] == "step,class,column,current_A,v_ivc_V,comp_bit");
    REQUIRE(lines[1] == "0,0,0,4.22648998e-06,8.45297997e-01,0");
    REQUIRE(lines[23] == "22,2,2,5.11544187e-06,1.02308837e+00,1");
    REQUIRE(lines[31] == "0,0.00000000e+00,0.00000000e+00");
    REQUIRE(lines[32] == "1,8.00000000e-01,0.00000000e+00");
    REQUIRE(lines[33] == "2,1.00000000e+00,1.00000000e+00");

    // Sibling run file records the resolved parameters.
    const json j = json::parse(slurp("cli_trace.csv.run.json"));
    REQUIRE(j["command"] == "trace");
    REQUIRE(j["trace"]["sample"] == 142);
    REQUIRE(j["trace"]["per_class"] == 10);
    REQUIRE(j["trace"]["theta"] == 0.025);
    std::remove("cli_trace.csv");
    std::remove("cli_trace.csv.run.json");
}

TEST_CASE("trace rejects an out-of-range probe", "[cli]") {
    REQUIRE(run("trace --data " + kIris + " --sample 150 --out x.csv", true) ==
            2);
}

TEST_CASE("a full-width tolerance sweep degenerates to the class prior",
          "[cli]") {
    REQUIRE(run("sweep --data " + kIris +
                " --param theta --values 1.0 --out cli_sw.csv") == 0);
    REQUIRE(slurp("cli_sw.csv") ==
            "value,mean_accuracy,std_accuracy\n"
            "1.00000000e+00,3.33333333e-01,0.00000000e+00\n");
    std::remove("cli_sw.csv");
    std::remove("cli_sw.csv.run.json");
}

TEST_CASE("level-count sweep reproduces the frozen accuracy curve", "[cli]") {
    REQUIRE(run("sweep --data " + kIris +
                " --param n_levels --method pnn-q --values 4,8,16,256"
                " --out cli_nl.csv") == 0);
    REQUIRE(slurp("cli_nl.csv") ==
            "value,mean_accuracy,std_accuracy\n"
            "4.00000000e+00,6.66666667e-01,0.00000000e+00\n"
            "8.00000000e+00,8.80000000e-01,0.00000000e+00\n"
            "1.60000000e+01,9.26666667e-01,0.00000000e+00\n"
            "2.56000000e+02,9.46666667e-01,0.00000000e+00\n");
    std::remove("cli_nl.csv");
    std::remove("cli_nl.csv.run.json");
}

TEST_CASE("level-count sweep requires a quantized method", "[cli]") {
    REQUIRE(run("sweep --data " + kIris +
                " --param n_levels --method pnn --values 16 --out x.csv",
                true) == 2);
}

TEST_CASE("cost report totals and overrides", "[cli]") {
    REQUIRE(run("cost --out cli_cost.json") == 0);
    const json j = json::parse(slurp("cli_cost.json"));
    REQUIRE(j["n_classes"] == 3);
    REQUIRE(j["components"].size() == 5);
    REQUIRE_THAT(j["total_power_mW"].get<double>(),
                 Catch::Matchers::WithinRel(123.76205104734, 1e-12));
    REQUIRE_THAT(j["total_area_um2"].get<double>(),
                 Catch::Matchers::WithinRel(5763.2899, 1e-12));
    std::remove("cli_cost.json");

    REQUIRE(run("cost --classes 1 --override ivc:0.02:1638.7 "
                "--out cli_cost1.json") == 0);
    const json o = json::parse(slurp("cli_cost1.json"));
    REQUIRE(o["total_power_W"].get<double>() < 0.0413);
    std::remove("cli_cost1.json");

    REQUIRE(run("cost --override ivc=oops --out x.json", true) == 2);
}

TEST_CASE("flags override the config file, which overrides defaults",
          "[cli]") {
    {
        std::ofstream cfg("cli_cfg.json", std::ios::binary);
        cfg << "{\"method\": \"pnn-q\", \"seed\": 7, \"out\": "
               "\"cli_pref.json\"}\n";
    }
    REQUIRE(run("cv --data " + kIris + " --config cli_cfg.json --seed 42") ==
            0);
    const json j = json::parse(slurp("cli_pref.json"));
    REQUIRE(j["method"] == "pnn-q");         // from the config file
    REQUIRE(j["config"]["seed"] == 42);      // flag beats config
    REQUIRE(j["mean_accuracy"].get<double>() == 0.9266666666666667);
    std::remove("cli_cfg.json");
    std::remove("cli_pref.json");
}
