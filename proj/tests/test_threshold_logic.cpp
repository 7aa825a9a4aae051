#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "apnn/core.hpp"
#include "apnn/dataset.hpp"
#include "apnn/threshold_logic.hpp"

namespace {

// Synthetic 2-class, 2-feature unit-circle set with one diffuse and one
// tight cluster; small enough to cross-check training exhaustively.
apnn::Dataset toy_dataset() {
    const std::vector<std::vector<double>> pts = {
        {0.9781476007338057, 0.20791169081775934},
        {0.7771459614569709, 0.6293203910498374},
        {0.4067366430758002, 0.9135454576426009},
        {0.8090169943749475, 0.5877852522924731},
        {0.7986355100472928, 0.6018150231520483},
        {0.7880107536067219, 0.6156614753256583}};
    apnn::Dataset d;
    d.n_features = 2;
    d.n_classes = 2;
    d.label_names = {"wide", "tight"};
    for (std::size_t i = 0; i < pts.size(); ++i)
        d.samples.push_back({pts[i], i < 3 ? 0 : 1});
    return d;
}

std::vector<apnn::Sample> toy_train() {
    std::vector<apnn::Sample> t;
    const apnn::Dataset d = toy_dataset();
    for (std::size_t i = 0; i < d.samples.size(); ++i)
        t.push_back({apnn::unit_normalize(d.samples[i].features,
                                          static_cast<int>(i)),
                     d.samples[i].label});
    return t;
}

}  // namespace

TEST_CASE("geometric threshold grid endpoints", "[threshold]") {
    const auto& g = apnn::canonical_theta_grid();
    REQUIRE(g.size() == 64);
    REQUIRE(g.front() == 0.0006905339660024879);
    REQUIRE(g[31] == 0.024803141437003122);
    REQUIRE(g.back() == 1.0);
    for (std::size_t i = 1; i < g.size(); ++i) REQUIRE(g[i] > g[i - 1]);
}

TEST_CASE("hardware threshold grid follows the level count", "[threshold]") {
    apnn::QuantizerSpec q;
    const auto g = apnn::quantized_theta_grid(q);
    REQUIRE(g.size() == 15);
    REQUIRE(g.front() == 1.0 / 15.0);
    REQUIRE(g.back() == 1.0);
    q.n_levels = 4;
    const auto g4 = apnn::quantized_theta_grid(q);
    REQUIRE(g4 == std::vector<double>{1.0 / 3.0, 2.0 / 3.0, 1.0});
}

TEST_CASE("activation is a strict two-sided tolerance test", "[threshold]") {
    const std::vector<double> x{1.0, 0.0};
    const std::vector<double> w{1.0, 0.0};
    REQUIRE(apnn::activation(x, w, 1.0, 0.01));           // |1-1| = 0 < 0.01
    REQUIRE_FALSE(apnn::activation(x, {0.0, 1.0}, 1.0, 0.5));  // |0-1| = 1
    // Boundary is exclusive: dot = 0.99, theta = 0.01 must not fire.
    const std::vector<double> w2{0.99, 0.0};
    REQUIRE_FALSE(apnn::activation(x, w2, 1.0, 0.01));
    REQUIRE(apnn::activation(x, w2, 1.0, 0.010000001));
}

TEST_CASE("activation example from the first stored column", "[threshold]") {
    const std::vector<double> x{0.8037727730153806, 0.5516087657948691,
                                0.22064350631794763, 0.03152050090256395};
    const std::vector<double> w{0.8, 0.5333333333333333, 0.26666666666666666,
                                0.06666666666666667};
    REQUIRE(apnn::dot(x, w) == 0.9981491952478583);
    REQUIRE(apnn::activation(x, w, 1.0, 0.01));
    REQUIRE_FALSE(apnn::activation(x, w, 1.0, 0.001));
}

TEST_CASE("activation validates its parameters", "[threshold]") {
    const std::vector<double> x{1.0, 0.0};
    REQUIRE_THROWS_AS(apnn::activation(x, x, 1.0, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(apnn::activation(x, x, 1.0, 1.5), std::invalid_argument);
    REQUIRE_THROWS_AS(apnn::activation(x, x, 0.0, 0.1), std::invalid_argument);
}

TEST_CASE("class score is the firing fraction", "[threshold]") {
    const std::vector<std::vector<double>> crossbar{
        {1.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}, {0.6, 0.8}};
    const std::vector<double> x{1.0, 0.0};
    // Dots are 1.0, 0.0, 1.0, 0.6: columns 0, 2, 3 fire at theta 0.5 but
    // column 3 (|0.6 - 1| = 0.4) drops out at theta 0.3.
    REQUIRE(apnn::class_score(x, crossbar, 0.5) == 3.0 / 4.0);
    REQUIRE(apnn::class_score(x, crossbar, 0.3) == 2.0 / 4.0);
    REQUIRE_THROWS_AS(apnn::class_score(x, {}, 0.5), std::invalid_argument);
}

TEST_CASE("score is monotone in theta", "[threshold]") {
    const auto train = toy_train();
    std::vector<std::vector<double>> crossbar;
    for (const auto& s : train) crossbar.push_back(s.features);
    const std::vector<double> x = train[0].features;
    double prev = 0.0;
    for (double theta : apnn::canonical_theta_grid()) {
        const double s = apnn::class_score(x, crossbar, theta);
        REQUIRE(s >= prev);
        prev = s;
    }
}

TEST_CASE("winner selection and the all-quiet flag", "[threshold]") {
    apnn::ApnnModel m;
    m.policy.kind = apnn::PolicyKind::Fixed;
    m.policy.theta = 0.1;
    m.class_crossbars = {{{1.0, 0.0}}, {{0.0, 1.0}}};
    m.quantized = false;

    const apnn::Prediction hit = apnn::apnn_classify(m, {1.0, 0.0});
    REQUIRE(hit.class_id == 0);
    REQUIRE(hit.scores == std::vector<double>{1.0, 0.0});
    REQUIRE(hit.activated);

    const double r = 1.0 / std::sqrt(2.0);
    const apnn::Prediction quiet = apnn::apnn_classify(m, {r, r});
    REQUIRE(quiet.class_id == 0);  // ties resolve to the lowest class
    REQUIRE_FALSE(quiet.activated);
}

TEST_CASE("per-class policy applies each class its own tolerance",
          "[threshold]") {
    apnn::ApnnModel m;
    m.policy.kind = apnn::PolicyKind::PerClass;
    m.policy.per_class = {0.5, 0.001};
    m.class_crossbars = {{{0.8, 0.6}}, {{0.8, 0.6}}};
    m.quantized = false;
    // Identical crossbars; only class 0's loose tolerance fires.
    const apnn::Prediction p = apnn::apnn_classify(m, {1.0, 0.0});
    REQUIRE(p.scores[0] == 1.0);
    REQUIRE(p.scores[1] == 0.0);
    REQUIRE(p.class_id == 0);
}

TEST_CASE("policy validation", "[threshold]") {
    apnn::ThresholdPolicy p;
    p.kind = apnn::PolicyKind::Fixed;
    p.theta = 0.0;
    REQUIRE_THROWS_AS(p.validate(3), std::invalid_argument);
    p.theta = 1.0;
    REQUIRE_NOTHROW(p.validate(3));
    p.kind = apnn::PolicyKind::PerClass;
    p.per_class = {0.1, 0.2};
    REQUIRE_THROWS_AS(p.validate(3), std::invalid_argument);
    p.per_class = {0.1, 0.2, 1.1};
    REQUIRE_THROWS_AS(p.validate(3), std::invalid_argument);
    p.per_class = {0.1, 0.2, 0.3};
    REQUIRE_NOTHROW(p.validate(3));
}

TEST_CASE("fixed training picks the documented toy tolerance", "[threshold]") {
    const auto train = toy_train();
    const double theta_star = apnn::train_fixed_threshold(train, 2);
    REQUIRE(theta_star == 0.0006905339660024879);
    apnn::ThresholdPolicy p;
    p.kind = apnn::PolicyKind::Fixed;
    p.theta = theta_star;
    REQUIRE(apnn::loo_threshold_accuracy(train, 2, p) == 0.8333333333333334);
}

TEST_CASE("fixed training breaks ties toward the smaller tolerance",
          "[threshold]") {
    // Orthogonal clusters: every tolerance below 1 scores LOO 1.0, so the
    // grid's smallest value must be chosen.
    std::vector<apnn::Sample> train;
    for (int i = 0; i < 4; ++i) {
        train.push_back({{1.0, 0.0}, 0});
        train.push_back({{0.0, 1.0}, 1});
    }
    REQUIRE(apnn::train_fixed_threshold(train, 2) ==
            apnn::canonical_theta_grid().front());
}

TEST_CASE("adaptive training on the toy set matches the frozen result",
          "[threshold]") {
    const auto train = toy_train();
    const apnn::ThresholdPolicy p = apnn::train_adaptive_thresholds(train, 2);
    REQUIRE(p.kind == apnn::PolicyKind::PerClass);
    REQUIRE(p.per_class ==
            std::vector<double>{0.11136233976754242, 0.0006905339660024879});
    REQUIRE(apnn::loo_threshold_accuracy(train, 2, p) == 1.0);
}

TEST_CASE("adaptive training never falls below the fixed optimum",
          "[threshold]") {
    const apnn::Dataset d = apnn::load_csv(std::string(APNN_DATA_DIR) +
                                           "/iris.csv");
    std::vector<apnn::Sample> train;
    for (int i = 0; i < 150; i += 3)
        train.push_back({apnn::unit_normalize(d.samples[i].features, i),
                         d.samples[i].label});
    apnn::QuantizerSpec q;
    apnn::ThresholdPolicy fixed;
    fixed.kind = apnn::PolicyKind::Fixed;
    fixed.theta =
        apnn::train_fixed_threshold(train, 3, apnn::canonical_theta_grid(), &q);
    const apnn::ThresholdPolicy adaptive =
        apnn::train_adaptive_thresholds(train, 3, apnn::canonical_theta_grid(),
                                        &q);
    REQUIRE(apnn::loo_threshold_accuracy(train, 3, adaptive, &q) >=
            apnn::loo_threshold_accuracy(train, 3, fixed, &q));
}

TEST_CASE("trainers validate inputs", "[threshold]") {
    REQUIRE_THROWS_AS(apnn::train_fixed_threshold({}, 2),
                      std::invalid_argument);
    const auto train = toy_train();
    REQUIRE_THROWS_AS(apnn::train_fixed_threshold(train, 2, {}),
                      std::invalid_argument);
}
