#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "netsched/decision.hpp"
#include "netsched/features.hpp"
#include "netsched/rng.hpp"
#include "netsched/telemetry.hpp"

#include <nlohmann/json_fwd.hpp>

namespace netsched {

// Geo-distributed layout: sites of co-located nodes, one symmetric base RTT
// per site pair, and a common intra-site RTT.
struct Topology {
    struct Site {
        std::string name;
        std::vector<NodeId> nodes;
    };

    std::vector<Site> sites;
    double intra_site_rtt_s = 0.0003;
    // Keyed by (min(site_a, site_b), max(site_a, site_b)).
    std::map<std::pair<std::string, std::string>, double> inter_site_rtt_s;
    std::map<NodeId, NodeCapacity> capacities; // missing nodes get NodeCapacity{}

    // Three sites, two nodes each (node-1..node-6), inter-site RTTs at three
    // distinct levels (11 ms / 31 ms / 65 ms) to model a wide-area spread.
    static Topology three_site_default();

    std::vector<NodeId> node_ids() const; // sorted
    const std::string& site_of(const NodeId& node) const;
    double base_rtt_s(const NodeId& a, const NodeId& b) const;
    NodeCapacity capacity(const NodeId& node) const;
    void validate() const; // throws ValidationError
};

// Per-application duration-model constants.
struct AppParams {
    double base_seconds = 1.0;       // duration of a 1e5-record, 1-executor run
                                     // at zero load and zero RTT penalty
    double bytes_per_record = 100.0; // shuffle volume per input record
};

// Ground-truth world parameters. The duration oracle is
//
//   duration = base_seconds(app) * (input_size / 1e5) / executor_count^alpha
//            * (1 + beta_net * shuffle_bytes / bw_eff)
//            * (1 + beta_cpu * bg_cpu_load / cpu_total)
//            * (1 + beta_rtt * rtt_mean / rtt_ref)
//            * noise                       (lognormal(0, noise_sigma), or 1)
//
// with shuffle_bytes = bytes_per_record * input_size,
//      bw_eff = max(bw_cap - bg_net_bps, bw_cap / 100),
//      rtt_mean = mean load-adjusted RTT to all peers (jitter-free),
// and, for Join only, an extra join_skew_factor on one skewed node drawn at
// cluster construction.
struct OracleParams {
    std::array<AppParams, 3> apps = {
        // Indexed by AppType. base_seconds(Sort) is calibrated so a noiseless
        // 1e5-record, 1-executor run on an unloaded node whose mean peer RTT
        // equals rtt_ref_s lasts 18.18 s.
        AppParams{12.023809523809524, 100.0}, // sort
        AppParams{18.035714285714285, 250.0}, // pagerank: heavier iterative shuffle
        AppParams{14.428571428571429, 150.0}, // join
    };
    double executor_alpha = 0.7; // sub-linear executor scaling
    double beta_net = 1.0;
    double beta_cpu = 0.5;
    double beta_rtt = 0.5;
    double rtt_ref_s = 0.010;
    double bw_cap_bps = 1.25e9;
    double noise_sigma = 0.08; // scales duration noise AND telemetry jitter

    // Background-load dynamics and telemetry texture.
    double bg_net_mean_bps = 1.0e8; // sustained repeated 10 MB HTTP download
    double bg_cpu_min = 0.5;        // load-average draw range for loaded nodes
    double bg_cpu_max = 1.5;
    double idle_net_bps = 1.0e5;  // housekeeping traffic on unloaded nodes
    double idle_cpu_load = 0.05;  // baseline runnable processes
    double rtt_load_gamma = 0.5;  // congestion coupling into observed RTT
    double join_skew_factor = 1.25;

    const AppParams& app(AppType a) const { return apps[static_cast<std::size_t>(a)]; }
    AppParams& app(AppType a) { return apps[static_cast<std::size_t>(a)]; }
    void validate() const;
};

struct NodeState {
    double bg_cpu_load = 0.0;
    double bg_net_bps = 0.0;
    double mem_used_bytes = 0.0;
};

struct SimulatedRun {
    JobSpec job;
    NodeId node;
    ClusterSnapshot snapshot_before;
    double duration_s = 0.0;
};

// Deterministic cluster model. One seed fixes every subsequent draw; the
// draw order is part of the contract:
//
//   construction          1 uniform_index(n)           join-skew node
//   apply_background_load k uniform_index draws        node selection
//                          (partial Fisher-Yates over the sorted node list),
//                         then per selected node, in sorted node order:
//                         bg_net  = bg_net_mean_bps * uniform(0.5, 1.5)
//                         bg_cpu  = uniform(bg_cpu_min, bg_cpu_max)
//   sample_snapshot       per node in sorted order: one normal(0,1) per peer
//                         (sorted) for RTT jitter, then one each for tx, rx,
//                         cpu, mem. Every observation is
//                         true_value * max(0, 1 + noise_sigma * z).
//   run_job               sample_snapshot draws, then one lognormal for the
//                         duration noise factor.
//
// Noiseless queries (oracle_duration with noiseless=true,
// counterfactual_durations) never touch the stream.
class SimCluster {
public:
    SimCluster(Topology topology, OracleParams params, std::uint64_t seed);

    const Topology& topology() const { return topology_; }
    const OracleParams& params() const { return params_; }
    const std::vector<NodeId>& node_ids() const { return ids_; }
    const NodeState& state(const NodeId& node) const;
    const NodeId& join_skew_node() const { return join_skew_node_; }
    double now_s() const { return now_s_; }
    RandomStream& rng() { return rng_; }

    // Clears all background state, then loads ceil(intensity * n) nodes.
    void apply_background_load(double intensity);

    // Pins one node's background state directly (no stream draws); for
    // scripted scenarios.
    void set_background(const NodeId& node, double bg_net_bps, double bg_cpu_load,
                        double mem_used_bytes = 0.0);

    // Observed telemetry for every node at the current time.
    ClusterSnapshot sample_snapshot();

    // Load-adjusted, jitter-free RTT: base * (1 + gamma * (bg_i + bg_j) / bw_cap).
    double loaded_rtt_s(const NodeId& a, const NodeId& b) const;

    // Mean loaded RTT from node to all peers; the oracle's network-distance input.
    double noiseless_rtt_mean_s(const NodeId& node) const;

    double oracle_duration(const JobSpec& job, const NodeId& node, bool noiseless = true);

    SimulatedRun run_job(const JobSpec& job, const NodeId& node);

    // Noiseless duration per node at the current state; the ground truth for
    // top-k evaluation.
    std::map<NodeId, double> counterfactual_durations(const JobSpec& job) const;

private:
    double noiseless_duration(const JobSpec& job, const NodeId& node) const;

    Topology topology_;
    OracleParams params_;
    std::vector<NodeId> ids_;
    std::map<NodeId, NodeState> state_;
    RandomStream rng_;
    NodeId join_skew_node_;
    double now_s_ = 0.0;
};

// One config file carries both the topology and the oracle parameters:
// { "topology": {...}, "oracle": {...} }. Either section may be omitted to
// keep its defaults.
struct SimConfig {
    Topology topology = Topology::three_site_default();
    OracleParams oracle;
};

nlohmann::json sim_config_to_json(const SimConfig& config);
SimConfig sim_config_from_json(const nlohmann::json& j);
SimConfig load_sim_config(const std::filesystem::path& path);

} // namespace netsched
