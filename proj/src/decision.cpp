#include "netsched/decision.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

namespace netsched {

using nlohmann::json;

namespace {

void sort_ranking(std::vector<RankedNode>& ranking) {
    std::sort(ranking.begin(), ranking.end(), [](const RankedNode& a, const RankedNode& b) {
        if (a.predicted_duration_s != b.predicted_duration_s)
            return a.predicted_duration_s < b.predicted_duration_s;
        return a.node < b.node;
    });
}

} // namespace

PlacementDecision rank_with(const NodePredictor& predictor, const ClusterSnapshot& snapshot,
                            const JobSpec& job) {
    if (snapshot.nodes.empty()) throw ValidationError("snapshot has no nodes");
    validate(job);

    PlacementDecision decision;
    decision.job = job;
    decision.snapshot_timestamp_s = snapshot.timestamp_s;
    decision.ranking.reserve(snapshot.nodes.size());
    for (const auto& [node, unused] : snapshot.nodes) {
        const double predicted = predictor(node, snapshot, job);
        if (!std::isfinite(predicted))
            throw ValidationError("non-finite prediction for node " + node);
        decision.ranking.push_back(RankedNode{node, predicted});
    }
    sort_ranking(decision.ranking);
    decision.chosen = decision.ranking.front().node;
    return decision;
}

PlacementDecision rank_nodes(const TrainedModel& model, const ClusterSnapshot& snapshot,
                             const JobSpec& job) {
    if (model.schema != feature_names())
        throw SchemaError("model schema does not match this build's feature set");
    return rank_with(
        [&model](const NodeId& node, const ClusterSnapshot& snap, const JobSpec& j) {
            return model.predict(build_features(node, snap, j));
        },
        snapshot, job);
}

PlacementDecision baseline_default(const ClusterSnapshot& snapshot, const JobSpec& job,
                                   const std::map<NodeId, NodeCapacity>& capacities) {
    if (snapshot.nodes.empty()) throw ValidationError("snapshot has no nodes");
    validate(job);

    PlacementDecision decision;
    decision.job = job;
    decision.snapshot_timestamp_s = snapshot.timestamp_s;
    const double requested_bytes = static_cast<double>(job.executor_memory_mb) * 1024.0 * 1024.0;
    for (const auto& [node, telemetry] : snapshot.nodes) {
        if (telemetry.mem_available_bytes < requested_bytes) continue; // filtered out
        const auto it = capacities.find(node);
        const NodeCapacity cap = it != capacities.end() ? it->second : NodeCapacity{};
        const double cpu_free =
            std::clamp((cap.cpu_total - telemetry.cpu_load1) / cap.cpu_total, 0.0, 1.0);
        const double mem_free = telemetry.mem_available_bytes / cap.mem_total_bytes;
        const double score = 0.5 * (cpu_free + mem_free);
        decision.ranking.push_back(RankedNode{node, -score});
    }
    if (decision.ranking.empty()) throw ValidationError("no feasible node");
    sort_ranking(decision.ranking);
    decision.chosen = decision.ranking.front().node;
    return decision;
}

double topk_accuracy(const std::vector<PlacementDecision>& decisions,
                     const std::vector<NodeId>& true_fastest, int k) {
    if (decisions.size() != true_fastest.size())
        throw ValidationError("topk_accuracy: decision/truth list lengths differ");
    if (k < 1) throw ValidationError("topk_accuracy: k must be >= 1");
    if (decisions.empty()) return 0.0;

    std::size_t hits = 0;
    for (std::size_t i = 0; i < decisions.size(); ++i) {
        const auto& ranking = decisions[i].ranking;
        const std::size_t prefix = std::min<std::size_t>(static_cast<std::size_t>(k), ranking.size());
        for (std::size_t r = 0; r < prefix; ++r) {
            if (ranking[r].node == true_fastest[i]) {
                ++hits;
                break;
            }
        }
    }
    return static_cast<double>(hits) / static_cast<double>(decisions.size());
}

json job_to_json(const JobSpec& job) {
    return json{{"app", std::string(to_string(job.app))},
                {"input_size", job.input_size},
                {"executor_count", job.executor_count},
                {"executor_memory_mb", job.executor_memory_mb}};
}

JobSpec job_from_json(const json& j) {
    JobSpec job;
    try {
        job.app = app_type_from_string(j.at("app").get<std::string>());
        job.input_size = j.at("input_size").get<std::int64_t>();
        job.executor_count = j.at("executor_count").get<int>();
        job.executor_memory_mb = j.at("executor_memory_mb").get<int>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("job: ") + e.what());
    }
    validate(job);
    return job;
}

json decision_to_json(const PlacementDecision& decision) {
    json ranking = json::array();
    for (const RankedNode& r : decision.ranking)
        ranking.push_back(json{{"node", r.node}, {"predicted_duration_s", r.predicted_duration_s}});
    return json{{"job", job_to_json(decision.job)},
                {"snapshot_timestamp", decision.snapshot_timestamp_s},
                {"ranking", ranking},
                {"chosen", decision.chosen},
                {"manifest",
                 {{"job", job_to_json(decision.job)},
                  {"node", decision.chosen},
                  {"nodeAffinity", decision.chosen}}}};
}

} // namespace netsched
