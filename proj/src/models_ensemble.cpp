#include "netsched/models.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

namespace netsched {

TrainedModel train_random_forest(const Dataset& data, const TrainConfig& cfg) {
    validate(data);
    const ForestConfig& fc = cfg.forest;
    if (fc.n_trees < 1) throw ValidationError("forest n_trees must be >= 1");
    if (fc.feature_subsample <= 0.0 || fc.feature_subsample > 1.0)
        throw ValidationError("forest feature_subsample must be in (0, 1]");

    const std::size_t n = data.size();
    int per_split = static_cast<int>(
        std::ceil(fc.feature_subsample * static_cast<double>(kFeatureCount)));
    per_split = std::clamp(per_split, 1, static_cast<int>(kFeatureCount));

    ForestParams params;
    params.trees.resize(static_cast<std::size_t>(fc.n_trees));

    // Each tree owns a seed-derived stream and its own output slot, so the
    // result is identical for any worker count.
    const auto fit_one = [&](int t) {
        RandomStream stream(derive_seed(cfg.seed, static_cast<std::uint64_t>(t)));
        std::vector<std::size_t> rows(n);
        if (fc.bootstrap) {
            for (std::size_t i = 0; i < n; ++i) rows[i] = stream.uniform_index(n);
        } else {
            for (std::size_t i = 0; i < n; ++i) rows[i] = i;
        }
        TreeFitOptions opts;
        opts.max_depth = fc.max_depth;
        opts.min_samples_leaf = fc.min_samples_leaf;
        opts.features_per_split = per_split;
        opts.rng = &stream;
        params.trees[static_cast<std::size_t>(t)] =
            fit_tree(data.features, data.targets_s, rows, opts);
    };

    const unsigned workers = std::min<unsigned>(
        std::max(1u, std::thread::hardware_concurrency()),
        static_cast<unsigned>(fc.n_trees));
    if (workers <= 1) {
        for (int t = 0; t < fc.n_trees; ++t) fit_one(t);
    } else {
        std::atomic<int> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                try {
                    for (int t = next.fetch_add(1); t < fc.n_trees; t = next.fetch_add(1))
                        fit_one(t);
                } catch (...) {
                    const std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            });
        }
        for (auto& worker : pool) worker.join();
        if (failure) std::rethrow_exception(failure);
    }

    TrainedModel model;
    model.kind = ModelKind::RandomForest;
    model.schema = data.schema;
    model.config = cfg;
    model.params = std::move(params);
    return model;
}

TrainedModel train_gbdt(const Dataset& data, const TrainConfig& cfg) {
    validate(data);
    const GbdtConfig& gc = cfg.gbdt;
    if (gc.n_rounds < 0) throw ValidationError("gbdt n_rounds must be >= 0");
    if (gc.learning_rate <= 0.0) throw ValidationError("gbdt learning_rate must be > 0");

    const std::size_t n = data.size();
    double base = 0.0;
    for (double t : data.targets_s) base += t;
    base /= static_cast<double>(n);

    std::vector<double> residuals(n);
    for (std::size_t i = 0; i < n; ++i) residuals[i] = data.targets_s[i] - base;

    std::vector<std::size_t> all_rows(n);
    for (std::size_t i = 0; i < n; ++i) all_rows[i] = i;

    GbdtParams params;
    params.learning_rate = gc.learning_rate;
    params.base_prediction = base;
    params.trees.reserve(static_cast<std::size_t>(gc.n_rounds));
    TreeFitOptions opts;
    opts.max_depth = gc.max_depth;
    opts.min_samples_leaf = gc.min_samples_leaf;
    for (int round = 0; round < gc.n_rounds; ++round) {
        RegressionTree tree = fit_tree(data.features, residuals, all_rows, opts);
        for (std::size_t i = 0; i < n; ++i)
            residuals[i] -= gc.learning_rate * tree.predict(data.features[i]);
        params.trees.push_back(std::move(tree));
    }

    TrainedModel model;
    model.kind = ModelKind::GradientBoosted;
    model.schema = data.schema;
    model.config = cfg;
    model.params = std::move(params);
    return model;
}

} // namespace netsched
