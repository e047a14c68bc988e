#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "netsched/models.hpp"

using namespace netsched;

namespace {

Dataset quadratic_grid(double lo, double hi, std::size_t points) {
    Dataset data;
    data.schema = feature_names();
    for (std::size_t i = 0; i < points; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
        FeatureVector fv{};
        fv[0] = x;
        data.features.push_back(fv);
        data.targets_s.push_back(x * x);
    }
    return data;
}

double dataset_mse(const TrainedModel& model, const Dataset& data) {
    double sse = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double err = model.predict(data.features[i]) - data.targets_s[i];
        sse += err * err;
    }
    return sse / static_cast<double>(data.size());
}

} // namespace

TEST_SUITE_BEGIN("models.ensemble");

TEST_CASE("forest on a single-row dataset predicts that row's target") {
    Dataset data;
    data.schema = feature_names();
    FeatureVector fv{};
    fv[3] = 0.4;
    data.features.push_back(fv);
    data.targets_s.push_back(2.5);

    TrainConfig cfg;
    cfg.forest.n_trees = 10;
    const TrainedModel model = train_random_forest(data, cfg);
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> x(0.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        FeatureVector probe{};
        for (double& v : probe) v = x(gen);
        CHECK(model.predict(probe) == 2.5);
    }
}

TEST_CASE("same seed trains bitwise-identical forests") {
    std::mt19937_64 gen(17);
    const Dataset data = testing::random_dataset(gen, 60);
    TrainConfig cfg;
    cfg.seed = 99;
    cfg.forest.n_trees = 25;
    const TrainedModel a = train_random_forest(data, cfg);
    const TrainedModel b = train_random_forest(data, cfg);
    for (int i = 0; i < 50; ++i) {
        FeatureVector probe{};
        for (double& v : probe) v = std::uniform_real_distribution<double>(0, 1)(gen);
        CHECK(a.predict(probe) == b.predict(probe));
    }
}

TEST_CASE("forest beats linear on a noiseless quadratic") {
    const Dataset grid = quadratic_grid(0.1, 2.0, 120);
    Dataset train, test;
    train.schema = test.schema = feature_names();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        auto& dst = (i % 2 == 0) ? train : test;
        dst.features.push_back(grid.features[i]);
        dst.targets_s.push_back(grid.targets_s[i]);
    }
    TrainConfig cfg;
    cfg.seed = 5;
    const TrainedModel forest = train_random_forest(train, cfg);
    const TrainedModel linear = train_linear(train, cfg);
    CHECK(dataset_mse(forest, test) < dataset_mse(linear, test));
}

TEST_CASE("forest predictions stay inside the trees' and targets' ranges") {
    std::mt19937_64 gen(31);
    for (int iter = 0; iter < 20; ++iter) {
        const Dataset data = testing::random_dataset(gen, 40);
        TrainConfig cfg;
        cfg.seed = static_cast<std::uint64_t>(iter);
        cfg.forest.n_trees = 12;
        const TrainedModel model = train_random_forest(data, cfg);
        const auto& trees = std::get<ForestParams>(model.params).trees;

        const auto [target_min, target_max] =
            std::minmax_element(data.targets_s.begin(), data.targets_s.end());
        FeatureVector probe{};
        for (double& v : probe) v = std::uniform_real_distribution<double>(-1, 2)(gen);

        double tree_min = std::numeric_limits<double>::infinity();
        double tree_max = -std::numeric_limits<double>::infinity();
        for (const auto& tree : trees) {
            const double p = tree.predict(probe);
            tree_min = std::min(tree_min, p);
            tree_max = std::max(tree_max, p);
        }
        const double prediction = model.predict(probe);
        CHECK(prediction >= tree_min - 1e-12);
        CHECK(prediction <= tree_max + 1e-12);
        CHECK(tree_min >= *target_min - 1e-12);
        CHECK(tree_max <= *target_max + 1e-12);
    }
}

TEST_CASE("gbdt with zero rounds predicts the target mean") {
    std::mt19937_64 gen(41);
    const Dataset data = testing::random_dataset(gen, 30);
    double mean = 0.0;
    for (double t : data.targets_s) mean += t;
    mean /= static_cast<double>(data.size());

    TrainConfig cfg;
    cfg.gbdt.n_rounds = 0;
    const TrainedModel model = train_gbdt(data, cfg);
    FeatureVector probe{};
    probe[7] = 1.0;
    CHECK(model.predict(probe) == doctest::Approx(mean).epsilon(1e-14));
}

TEST_CASE("gbdt single round at lr 1 equals base plus the residual tree") {
    std::mt19937_64 gen(43);
    const Dataset data = testing::random_dataset(gen, 25);
    TrainConfig cfg;
    cfg.gbdt.n_rounds = 1;
    cfg.gbdt.learning_rate = 1.0;
    const TrainedModel model = train_gbdt(data, cfg);
    const auto& params = std::get<GbdtParams>(model.params);
    REQUIRE(params.trees.size() == 1);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double expected =
            params.base_prediction + params.trees[0].predict(data.features[i]);
        CHECK(model.predict(data.features[i]) == doctest::Approx(expected).epsilon(1e-14));
    }
}

TEST_CASE("gbdt training MSE is non-increasing per round") {
    std::mt19937_64 gen(47);
    for (int iter = 0; iter < 5; ++iter) {
        const Dataset data = testing::random_dataset(gen, 50);
        TrainConfig cfg;
        cfg.gbdt.n_rounds = 25;
        cfg.gbdt.max_depth = 3;
        const TrainedModel model = train_gbdt(data, cfg);
        const auto& params = std::get<GbdtParams>(model.params);

        std::vector<double> predictions(data.size(), params.base_prediction);
        double prev_mse = std::numeric_limits<double>::infinity();
        for (std::size_t round = 0; round <= params.trees.size(); ++round) {
            double sse = 0.0;
            for (std::size_t i = 0; i < data.size(); ++i) {
                const double err = predictions[i] - data.targets_s[i];
                sse += err * err;
            }
            const double mse = sse / static_cast<double>(data.size());
            CHECK(mse <= prev_mse + 1e-12);
            prev_mse = mse;
            if (round == params.trees.size()) break;
            for (std::size_t i = 0; i < data.size(); ++i)
                predictions[i] +=
                    params.learning_rate * params.trees[round].predict(data.features[i]);
        }
    }
}

TEST_CASE("hand-built ensembles evaluate by formula") {
    RegressionTree leaf4;
    leaf4.nodes.push_back(TreeNode{.value = 4.0});

    SUBCASE("forest of identical single-leaf trees") {
        TrainedModel model;
        model.kind = ModelKind::RandomForest;
        model.schema = feature_names();
        model.params = ForestParams{{leaf4, leaf4, leaf4}};
        CHECK(model.predict(FeatureVector{}) == 4.0);
    }
    SUBCASE("gbdt base 10, one tree of -2, lr 0.5") {
        RegressionTree negative;
        negative.nodes.push_back(TreeNode{.value = -2.0});
        TrainedModel model;
        model.kind = ModelKind::GradientBoosted;
        model.schema = feature_names();
        model.params = GbdtParams{{negative}, 0.5, 10.0};
        CHECK(model.predict(FeatureVector{}) == 9.0);
    }
}

TEST_CASE("tree models are invariant to scaling one feature column") {
    std::mt19937_64 gen(53);
    const Dataset data = testing::random_dataset(gen, 40);
    const double c = 7.5;
    const std::size_t column = 3;
    Dataset scaled = data;
    for (auto& fv : scaled.features) fv[column] *= c;

    TrainConfig cfg;
    cfg.seed = 8;
    cfg.forest.n_trees = 15;
    cfg.gbdt.n_rounds = 20;

    const TrainedModel forest = train_random_forest(data, cfg);
    const TrainedModel forest_scaled = train_random_forest(scaled, cfg);
    const TrainedModel gbdt = train_gbdt(data, cfg);
    const TrainedModel gbdt_scaled = train_gbdt(scaled, cfg);

    std::uniform_real_distribution<double> x(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        FeatureVector probe{};
        for (double& v : probe) v = x(gen);
        FeatureVector probe_scaled = probe;
        probe_scaled[column] *= c;
        CHECK(forest.predict(probe) == forest_scaled.predict(probe_scaled));
        CHECK(gbdt.predict(probe) == gbdt_scaled.predict(probe_scaled));
    }
}

TEST_CASE("feature importance") {
    SUBCASE("tree splitting on only one feature concentrates importance") {
        const Dataset grid = quadratic_grid(0.1, 2.0, 50); // only f0 varies
        TrainConfig cfg;
        cfg.forest.n_trees = 10;
        const TrainedModel forest = train_random_forest(grid, cfg);
        const auto importance = feature_importance(forest);
        CHECK(importance.at("rtt_mean_s") == doctest::Approx(1.0));
        CHECK(importance.at("tx_bps") == 0.0);

        const TrainedModel gbdt = train_gbdt(grid, cfg);
        const auto gb_importance = feature_importance(gbdt);
        CHECK(gb_importance.at("rtt_mean_s") == doctest::Approx(1.0));
    }
    SUBCASE("a constant feature never gains importance") {
        std::mt19937_64 gen(61);
        Dataset data = testing::random_dataset(gen, 50);
        for (auto& fv : data.features) fv[5] = 1.0;
        TrainConfig cfg;
        cfg.forest.n_trees = 20;
        const TrainedModel model = train_random_forest(data, cfg);
        CHECK(feature_importance(model).at(feature_names()[5]) == 0.0);
    }
    SUBCASE("the driving feature dominates under noise") {
        std::mt19937_64 gen(67);
        std::normal_distribution<double> noise(0.0, 0.05);
        std::uniform_real_distribution<double> x(0.0, 1.0);
        Dataset data;
        data.schema = feature_names();
        for (int i = 0; i < 120; ++i) {
            FeatureVector fv{};
            for (double& v : fv) v = x(gen);
            data.features.push_back(fv);
            data.targets_s.push_back(1.0 + fv[1] + noise(gen));
        }
        TrainConfig cfg;
        cfg.seed = 4;
        const TrainedModel model = train_random_forest(data, cfg);
        const auto importance = feature_importance(model);
        const double driver = importance.at(feature_names()[1]);
        for (const auto& [name, score] : importance)
            if (name != feature_names()[1]) CHECK(driver > score);
    }
    SUBCASE("linear models are unsupported") {
        std::mt19937_64 gen(71);
        const Dataset data = testing::random_dataset(gen, 20);
        const TrainedModel linear = train_linear(data, TrainConfig{});
        CHECK_THROWS_AS(feature_importance(linear), ValidationError);
        CHECK_NOTHROW(linear_weight_importance(linear));
        const TrainedModel forest = train_random_forest(data, TrainConfig{});
        CHECK_THROWS_AS(linear_weight_importance(forest), ValidationError);
    }
}

TEST_SUITE_END();
