#include "netsched/models.hpp"

#include <cmath>

namespace netsched {

void validate(const Dataset& data) {
    if (data.schema.size() != kFeatureCount)
        throw SchemaError("dataset schema has " + std::to_string(data.schema.size()) +
                          " names, expected " + std::to_string(kFeatureCount));
    if (data.features.size() != data.targets_s.size())
        throw ValidationError("dataset feature/target row counts differ");
    if (data.features.empty()) throw ValidationError("dataset is empty");
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (double v : data.features[i])
            if (!std::isfinite(v))
                throw ValidationError("dataset row " + std::to_string(i) +
                                      " has a non-finite feature");
        const double t = data.targets_s[i];
        if (!std::isfinite(t) || t <= 0.0)
            throw ValidationError("dataset row " + std::to_string(i) +
                                  " has a non-positive duration");
    }
}

std::string_view to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::Linear: return "linear";
        case ModelKind::RandomForest: return "random_forest";
        case ModelKind::GradientBoosted: return "gbdt";
    }
    throw Error("unreachable model kind");
}

ModelKind model_kind_from_string(std::string_view name) {
    if (name == "linear") return ModelKind::Linear;
    if (name == "random_forest") return ModelKind::RandomForest;
    if (name == "gbdt") return ModelKind::GradientBoosted;
    throw ParseError("unknown model kind '" + std::string(name) + "'");
}

double TrainedModel::predict(std::span<const double> fv) const {
    if (fv.size() != schema.size())
        throw SchemaError("feature vector length " + std::to_string(fv.size()) +
                          " does not match model schema length " +
                          std::to_string(schema.size()));
    if (const auto* lin = std::get_if<LinearParams>(&params)) {
        double y = lin->intercept;
        for (std::size_t j = 0; j < fv.size(); ++j)
            y += lin->weights[j] * (fv[j] - lin->feature_mean[j]) / lin->feature_scale[j];
        return y;
    }
    if (const auto* forest = std::get_if<ForestParams>(&params)) {
        double sum = 0.0;
        for (const auto& tree : forest->trees) sum += tree.predict(fv);
        return sum / static_cast<double>(forest->trees.size());
    }
    const auto& gbdt = std::get<GbdtParams>(params);
    double y = gbdt.base_prediction;
    for (const auto& tree : gbdt.trees) y += gbdt.learning_rate * tree.predict(fv);
    return y;
}

Metrics evaluate(const TrainedModel& model, const Dataset& data) {
    validate(data);
    if (model.schema != data.schema)
        throw SchemaError("model and dataset schemas differ");
    const std::size_t n = data.size();
    double ybar = 0.0;
    for (double t : data.targets_s) ybar += t;
    ybar /= static_cast<double>(n);

    double sse = 0.0;
    double sae = 0.0;
    double sst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double err = model.predict(data.features[i]) - data.targets_s[i];
        sse += err * err;
        sae += std::abs(err);
        sst += (data.targets_s[i] - ybar) * (data.targets_s[i] - ybar);
    }
    Metrics m;
    m.mse = sse / static_cast<double>(n);
    m.mae = sae / static_cast<double>(n);
    m.r2 = sst > 0.0 ? 1.0 - sse / sst : (sse == 0.0 ? 1.0 : 0.0);
    return m;
}

namespace {

void accumulate_gains(const RegressionTree& tree, std::vector<double>& by_feature) {
    for (const TreeNode& nd : tree.nodes)
        if (!nd.is_leaf()) by_feature[static_cast<std::size_t>(nd.feature)] += nd.gain;
}

std::map<std::string, double> normalized_map(const std::vector<std::string>& schema,
                                             const std::vector<double>& scores) {
    double total = 0.0;
    for (double s : scores) total += s;
    std::map<std::string, double> out;
    for (std::size_t j = 0; j < schema.size(); ++j)
        out[schema[j]] = total > 0.0 ? scores[j] / total : 0.0;
    return out;
}

} // namespace

std::map<std::string, double> feature_importance(const TrainedModel& model) {
    std::vector<double> scores(model.schema.size(), 0.0);
    if (const auto* forest = std::get_if<ForestParams>(&model.params)) {
        for (const auto& tree : forest->trees) accumulate_gains(tree, scores);
    } else if (const auto* gbdt = std::get_if<GbdtParams>(&model.params)) {
        for (const auto& tree : gbdt->trees) accumulate_gains(tree, scores);
    } else {
        throw ValidationError(
            "unsupported: feature_importance needs a tree model "
            "(use linear_weight_importance for the linear model)");
    }
    return normalized_map(model.schema, scores);
}

std::map<std::string, double> linear_weight_importance(const TrainedModel& model) {
    const auto* lin = std::get_if<LinearParams>(&model.params);
    if (lin == nullptr)
        throw ValidationError("linear_weight_importance needs a linear model");
    std::vector<double> scores(model.schema.size(), 0.0);
    for (std::size_t j = 0; j < scores.size(); ++j) scores[j] = std::abs(lin->weights[j]);
    return normalized_map(model.schema, scores);
}

} // namespace netsched
