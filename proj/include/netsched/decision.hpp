#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "netsched/models.hpp"
#include "netsched/telemetry.hpp"

#include <nlohmann/json_fwd.hpp>

namespace netsched {

struct RankedNode {
    NodeId node;
    double predicted_duration_s = 0.0;
};

// Ranking over all feasible nodes, ascending by predicted duration with
// lexicographic NodeId tie-break; chosen is always the first entry.
struct PlacementDecision {
    JobSpec job;
    std::vector<RankedNode> ranking;
    NodeId chosen;
    double snapshot_timestamp_s = 0.0;
};

// Per-node duration estimate used to rank. rank_nodes specializes this with
// build_features + model.predict; tests and the harness also plug in the
// simulator's ground-truth oracle.
using NodePredictor =
    std::function<double(const NodeId&, const ClusterSnapshot&, const JobSpec&)>;

PlacementDecision rank_with(const NodePredictor& predictor, const ClusterSnapshot& snapshot,
                            const JobSpec& job);

PlacementDecision rank_nodes(const TrainedModel& model, const ClusterSnapshot& snapshot,
                             const JobSpec& job);

struct NodeCapacity {
    double cpu_total = 6.0;
    double mem_total_bytes = 8.0 * 1024 * 1024 * 1024;
};

// Resource-availability baseline: filters nodes whose available memory cannot
// hold the requested executor memory, then ranks the rest descending by the
// mean of free-CPU fraction (clamped to [0,1]) and free-memory fraction.
// Ranking entries reuse predicted_duration_s to carry the negated score.
PlacementDecision baseline_default(const ClusterSnapshot& snapshot, const JobSpec& job,
                                   const std::map<NodeId, NodeCapacity>& capacities);

// Fraction of decisions whose first k ranked nodes contain the true fastest.
double topk_accuracy(const std::vector<PlacementDecision>& decisions,
                     const std::vector<NodeId>& true_fastest, int k);

nlohmann::json job_to_json(const JobSpec& job);
JobSpec job_from_json(const nlohmann::json& j);

// Full decision payload for the CLI: ranking, chosen node, and the placement
// manifest record {job, node, nodeAffinity} that pins the job to the node.
nlohmann::json decision_to_json(const PlacementDecision& decision);

} // namespace netsched
