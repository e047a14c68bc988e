#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "netsched/features.hpp"
#include "netsched/rng.hpp"

namespace netsched {

// Training data: parallel feature/target arrays plus the feature schema the
// vectors were built with.
struct Dataset {
    std::vector<std::string> schema;
    std::vector<FeatureVector> features;
    std::vector<double> targets_s;

    std::size_t size() const { return features.size(); }
};

// Throws unless schema matches feature_names(), rows are consistent and all
// targets are finite and positive.
void validate(const Dataset& data);

struct LinearConfig {
    double ridge_lambda = 1e-6;
};

struct ForestConfig {
    int n_trees = 100;
    int max_depth = 8;
    int min_samples_leaf = 2;
    double feature_subsample = 1.0 / 3.0; // fraction of features tried per split
    bool bootstrap = true;
};

struct GbdtConfig {
    int n_rounds = 200;
    double learning_rate = 0.1;
    int max_depth = 4;
    int min_samples_leaf = 2;
};

struct TrainConfig {
    std::uint64_t seed = 0;
    LinearConfig linear;
    ForestConfig forest;
    GbdtConfig gbdt;
};

// One node of a binary regression tree, stored in a flat array.
// Internal nodes route "feature < threshold" to the left child; leaves carry
// the mean target of their training rows. gain is the split's total SSE
// reduction (consumed by feature_importance).
struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    double gain = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;

    bool is_leaf() const { return feature < 0; }
};

struct RegressionTree {
    std::vector<TreeNode> nodes; // nodes[0] is the root

    double predict(std::span<const double> fv) const;
};

struct TreeFitOptions {
    int max_depth = 8;
    int min_samples_leaf = 2;
    // Features the tree may split on; empty means all.
    std::vector<int> allowed_features;
    // When > 0, each split considers a fresh random subset of this size drawn
    // from allowed_features (requires rng). 0 means "use all allowed".
    int features_per_split = 0;
    RandomStream* rng = nullptr;
};

// Greedy CART on squared error. Split thresholds sit at midpoints between
// consecutive distinct sorted values; ties in SSE reduction are broken by
// lowest feature index, then lowest threshold. Recursion stops at max_depth,
// min_samples_leaf, or zero target variance.
RegressionTree fit_tree(const Dataset& data, const TreeFitOptions& opts);

// Row-subset variant used for bootstrap resamples and residual fits.
// row_indices may repeat rows; targets_s must have one entry per data row.
RegressionTree fit_tree(const std::vector<FeatureVector>& features,
                        std::span<const double> targets_s,
                        const std::vector<std::size_t>& row_indices,
                        const TreeFitOptions& opts);

enum class ModelKind { Linear, RandomForest, GradientBoosted };

std::string_view to_string(ModelKind kind);
ModelKind model_kind_from_string(std::string_view name);

// y = intercept + sum_j weights[j] * (x_j - feature_mean[j]) / feature_scale[j]
struct LinearParams {
    std::vector<double> weights;
    double intercept = 0.0;
    std::vector<double> feature_mean;
    std::vector<double> feature_scale; // 1.0 for constant columns
};

struct ForestParams {
    std::vector<RegressionTree> trees; // prediction = mean of tree outputs
};

struct GbdtParams {
    std::vector<RegressionTree> trees; // prediction = base + lr * sum
    double learning_rate = 0.1;
    double base_prediction = 0.0;
};

struct TrainedModel {
    ModelKind kind = ModelKind::Linear;
    std::vector<std::string> schema;
    TrainConfig config;
    std::variant<LinearParams, ForestParams, GbdtParams> params;

    double predict(std::span<const double> fv) const;
    double predict(const FeatureVector& fv) const {
        return predict(std::span<const double>(fv.data(), fv.size()));
    }
};

// Ridge regression on standardized features (zero mean / unit variance;
// constant columns are excluded from the solve and get weight 0). The
// intercept is unpenalized and equals the target mean.
TrainedModel train_linear(const Dataset& data, const TrainConfig& cfg);

// Bagged CART ensemble. Tree t draws from an independent stream seeded with
// derive_seed(cfg.seed, t): first the n bootstrap row draws (when bootstrap
// is on), then one feature subset per split in node-construction order.
// A subset that admits no split falls back to the full feature set without
// consuming further draws. Results are identical however training is
// parallelized.
TrainedModel train_random_forest(const Dataset& data, const TrainConfig& cfg);

// Plain squared-loss residual boosting: base prediction is the target mean;
// each round fits a full-feature tree to the current residuals and adds it
// scaled by learning_rate.
TrainedModel train_gbdt(const Dataset& data, const TrainConfig& cfg);

struct Metrics {
    double mse = 0.0;
    double mae = 0.0;
    double r2 = 0.0;
};

Metrics evaluate(const TrainedModel& model, const Dataset& data);

// Per-feature total SSE reduction over all splits, normalized to sum to 1.
// Tree models only; the linear model reports through
// linear_weight_importance instead.
std::map<std::string, double> feature_importance(const TrainedModel& model);

// |standardized weight| per feature, for the linear model.
std::map<std::string, double> linear_weight_importance(const TrainedModel& model);

// Versioned JSON model files embedding kind, schema, config and parameters.
// Round-trips reproduce bit-identical predictions.
void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

} // namespace netsched
