#include "netsched/models.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

namespace netsched {

using nlohmann::json;

namespace {

constexpr int kModelFormatVersion = 1;
constexpr const char* kModelFormatTag = "netsched-model";

json tree_to_json(const RegressionTree& tree) {
    json nodes = json::array();
    for (const TreeNode& nd : tree.nodes) {
        if (nd.is_leaf()) {
            nodes.push_back(json{{"v", nd.value}});
        } else {
            nodes.push_back(json{{"f", nd.feature},
                                 {"t", nd.threshold},
                                 {"g", nd.gain},
                                 {"l", nd.left},
                                 {"r", nd.right}});
        }
    }
    return json{{"nodes", nodes}};
}

RegressionTree tree_from_json(const json& j) {
    if (!j.is_object() || !j.contains("nodes") || !j.at("nodes").is_array())
        throw ParseError("model file: malformed tree");
    RegressionTree tree;
    const auto& nodes = j.at("nodes");
    const int count = static_cast<int>(nodes.size());
    tree.nodes.reserve(nodes.size());
    for (const json& nj : nodes) {
        TreeNode nd;
        if (nj.contains("v")) {
            nd.value = nj.at("v").get<double>();
        } else {
            nd.feature = nj.at("f").get<int>();
            nd.threshold = nj.at("t").get<double>();
            nd.gain = nj.at("g").get<double>();
            nd.left = nj.at("l").get<int>();
            nd.right = nj.at("r").get<int>();
            if (nd.feature < 0 || nd.feature >= static_cast<int>(kFeatureCount) ||
                nd.left < 0 || nd.left >= count || nd.right < 0 || nd.right >= count)
                throw ParseError("model file: tree node indices out of range");
        }
        tree.nodes.push_back(nd);
    }
    if (tree.nodes.empty()) throw ParseError("model file: empty tree");
    return tree;
}

json config_to_json(const TrainConfig& cfg) {
    return json{{"seed", cfg.seed},
                {"linear", {{"ridge_lambda", cfg.linear.ridge_lambda}}},
                {"forest",
                 {{"n_trees", cfg.forest.n_trees},
                  {"max_depth", cfg.forest.max_depth},
                  {"min_samples_leaf", cfg.forest.min_samples_leaf},
                  {"feature_subsample", cfg.forest.feature_subsample},
                  {"bootstrap", cfg.forest.bootstrap}}},
                {"gbdt",
                 {{"n_rounds", cfg.gbdt.n_rounds},
                  {"learning_rate", cfg.gbdt.learning_rate},
                  {"max_depth", cfg.gbdt.max_depth},
                  {"min_samples_leaf", cfg.gbdt.min_samples_leaf}}}};
}

TrainConfig config_from_json(const json& j) {
    TrainConfig cfg;
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("linear"))
        cfg.linear.ridge_lambda = j.at("linear").value("ridge_lambda", cfg.linear.ridge_lambda);
    if (j.contains("forest")) {
        const json& f = j.at("forest");
        cfg.forest.n_trees = f.value("n_trees", cfg.forest.n_trees);
        cfg.forest.max_depth = f.value("max_depth", cfg.forest.max_depth);
        cfg.forest.min_samples_leaf = f.value("min_samples_leaf", cfg.forest.min_samples_leaf);
        cfg.forest.feature_subsample = f.value("feature_subsample", cfg.forest.feature_subsample);
        cfg.forest.bootstrap = f.value("bootstrap", cfg.forest.bootstrap);
    }
    if (j.contains("gbdt")) {
        const json& g = j.at("gbdt");
        cfg.gbdt.n_rounds = g.value("n_rounds", cfg.gbdt.n_rounds);
        cfg.gbdt.learning_rate = g.value("learning_rate", cfg.gbdt.learning_rate);
        cfg.gbdt.max_depth = g.value("max_depth", cfg.gbdt.max_depth);
        cfg.gbdt.min_samples_leaf = g.value("min_samples_leaf", cfg.gbdt.min_samples_leaf);
    }
    return cfg;
}

} // namespace

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
    json params;
    if (const auto* lin = std::get_if<LinearParams>(&model.params)) {
        params = json{{"weights", lin->weights},
                      {"intercept", lin->intercept},
                      {"feature_mean", lin->feature_mean},
                      {"feature_scale", lin->feature_scale}};
    } else if (const auto* forest = std::get_if<ForestParams>(&model.params)) {
        json trees = json::array();
        for (const auto& t : forest->trees) trees.push_back(tree_to_json(t));
        params = json{{"trees", trees}};
    } else {
        const auto& gbdt = std::get<GbdtParams>(model.params);
        json trees = json::array();
        for (const auto& t : gbdt.trees) trees.push_back(tree_to_json(t));
        params = json{{"trees", trees},
                      {"learning_rate", gbdt.learning_rate},
                      {"base_prediction", gbdt.base_prediction}};
    }

    const json j{{"format", kModelFormatTag},
                 {"version", kModelFormatVersion},
                 {"kind", std::string(to_string(model.kind))},
                 {"schema", model.schema},
                 {"config", config_to_json(model.config)},
                 {"params", params}};

    std::ofstream out(path);
    if (!out) throw Error("cannot write model file " + path.string());
    out << j.dump() << "\n";
}

TrainedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open model file " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError("model file " + path.string() + ": " + e.what());
    }

    if (!j.is_object() || j.value("format", "") != kModelFormatTag)
        throw ParseError("model file " + path.string() + ": not a netsched model");
    if (!j.contains("version") || !j.at("version").is_number_integer() ||
        j.at("version").get<int>() != kModelFormatVersion)
        throw ParseError("model file " + path.string() + ": unsupported format version");

    TrainedModel model;
    try {
        model.kind = model_kind_from_string(j.at("kind").get<std::string>());
        model.schema = j.at("schema").get<std::vector<std::string>>();
        model.config = config_from_json(j.value("config", json::object()));
    } catch (const json::exception& e) {
        throw ParseError("model file " + path.string() + ": " + e.what());
    }
    if (model.schema != feature_names())
        throw SchemaError("model file " + path.string() +
                          ": schema does not match this build's feature set");

    try {
        const json& params = j.at("params");
        if (model.kind == ModelKind::Linear) {
            LinearParams lin;
            lin.weights = params.at("weights").get<std::vector<double>>();
            lin.intercept = params.at("intercept").get<double>();
            lin.feature_mean = params.at("feature_mean").get<std::vector<double>>();
            lin.feature_scale = params.at("feature_scale").get<std::vector<double>>();
            if (lin.weights.size() != model.schema.size() ||
                lin.feature_mean.size() != model.schema.size() ||
                lin.feature_scale.size() != model.schema.size())
                throw SchemaError("model file: parameter dimensionality mismatch");
            model.params = std::move(lin);
        } else if (model.kind == ModelKind::RandomForest) {
            ForestParams forest;
            for (const json& tj : params.at("trees")) forest.trees.push_back(tree_from_json(tj));
            if (forest.trees.empty()) throw ParseError("model file: forest has no trees");
            model.params = std::move(forest);
        } else {
            GbdtParams gbdt;
            for (const json& tj : params.at("trees")) gbdt.trees.push_back(tree_from_json(tj));
            gbdt.learning_rate = params.at("learning_rate").get<double>();
            gbdt.base_prediction = params.at("base_prediction").get<double>();
            model.params = std::move(gbdt);
        }
    } catch (const json::exception& e) {
        throw ParseError("model file " + path.string() + ": " + e.what());
    }
    return model;
}

} // namespace netsched
