#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "netsched/errors.hpp"

#include <nlohmann/json_fwd.hpp>

namespace netsched {

// Node names are plain strings; their lexicographic order is the
// tie-breaking order used everywhere in the scheduler.
using NodeId = std::string;

struct RttStats {
    double mean_s = 0.0;
    double max_s = 0.0;
    double std_s = 0.0; // population standard deviation
};

// Mean / max / population std over a peer RTT list.
// Throws ValidationError on an empty list or non-finite/negative values.
RttStats rtt_stats(std::span<const double> rtts_s);

struct NodeTelemetry {
    std::map<NodeId, double> rtt_to_peers_s;
    double tx_bps = 0.0;
    double rx_bps = 0.0;
    double cpu_load1 = 0.0;
    double mem_available_bytes = 0.0;
};

struct ClusterSnapshot {
    double timestamp_s = 0.0;
    std::map<NodeId, NodeTelemetry> nodes;

    std::vector<NodeId> node_ids() const; // sorted
};

// Enforces all snapshot invariants: >= 2 nodes, finite non-negative values,
// and a full RTT mesh (every node lists exactly the other nodes, no self
// entry). Throws ValidationError naming the offending node/field.
void validate(const ClusterSnapshot& snapshot);

nlohmann::json snapshot_to_json(const ClusterSnapshot& snapshot);
ClusterSnapshot snapshot_from_json(const nlohmann::json& j);

// File layout:
// { "timestamp": <float>,
//   "nodes": { "<node>": { "rtt_s": {"<peer>": <float>, ...},
//                          "tx_bps": <float>, "rx_bps": <float>,
//                          "cpu_load1": <float>,
//                          "mem_available_bytes": <float> }, ... } }
ClusterSnapshot load_snapshot(const std::filesystem::path& path);
void save_snapshot(const ClusterSnapshot& snapshot, const std::filesystem::path& path);

} // namespace netsched
