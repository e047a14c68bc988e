#pragma once

// Shared fixtures and generators for the unit suites.

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <unistd.h>
#include <vector>

#include "netsched/harness.hpp"
#include "netsched/models.hpp"
#include "netsched/simulator.hpp"
#include "netsched/telemetry.hpp"

namespace netsched::testing {

// Fully-meshed snapshot with simple synthetic values; node i gets
// base metrics scaled by (i+1).
inline ClusterSnapshot make_snapshot(std::size_t n_nodes, double rtt_base = 0.01) {
    ClusterSnapshot snap;
    snap.timestamp_s = 100.0;
    std::vector<NodeId> ids;
    for (std::size_t i = 0; i < n_nodes; ++i) ids.push_back("node-" + std::to_string(i + 1));
    for (std::size_t i = 0; i < n_nodes; ++i) {
        NodeTelemetry t;
        for (std::size_t j = 0; j < n_nodes; ++j) {
            if (i == j) continue;
            t.rtt_to_peers_s[ids[j]] = rtt_base * static_cast<double>(i + j + 1);
        }
        t.tx_bps = 1e6 * static_cast<double>(i + 1);
        t.rx_bps = 2e6 * static_cast<double>(i + 1);
        t.cpu_load1 = 0.5 * static_cast<double>(i + 1);
        t.mem_available_bytes = 4e9 + 1e8 * static_cast<double>(i);
        snap.nodes[ids[i]] = std::move(t);
    }
    return snap;
}

// Random but valid snapshot for round-trip properties.
inline ClusterSnapshot random_snapshot(std::mt19937_64& gen) {
    std::uniform_int_distribution<std::size_t> n_dist(2, 8);
    std::uniform_real_distribution<double> rtt(1e-5, 0.2);
    std::uniform_real_distribution<double> rate(0.0, 2e9);
    std::uniform_real_distribution<double> load(0.0, 12.0);
    std::uniform_real_distribution<double> mem(1e6, 1.6e10);

    const std::size_t n = n_dist(gen);
    ClusterSnapshot snap;
    snap.timestamp_s = rate(gen);
    std::vector<NodeId> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back("n" + std::to_string(i));
    for (std::size_t i = 0; i < n; ++i) {
        NodeTelemetry t;
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) t.rtt_to_peers_s[ids[j]] = rtt(gen);
        t.tx_bps = rate(gen);
        t.rx_bps = rate(gen);
        t.cpu_load1 = load(gen);
        t.mem_available_bytes = mem(gen);
        snap.nodes[ids[i]] = std::move(t);
    }
    return snap;
}

// Dataset with uniformly random features and targets; targets positive.
inline Dataset random_dataset(std::mt19937_64& gen, std::size_t rows,
                              double target_lo = 0.1, double target_hi = 10.0) {
    std::uniform_real_distribution<double> x(0.0, 1.0);
    std::uniform_real_distribution<double> y(target_lo, target_hi);
    Dataset data;
    data.schema = feature_names();
    for (std::size_t i = 0; i < rows; ++i) {
        FeatureVector fv{};
        for (double& v : fv) v = x(gen);
        data.features.push_back(fv);
        data.targets_s.push_back(y(gen));
    }
    return data;
}

// Unique temp directory under the system temp root, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<unsigned> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("netsched-" + tag + "-" + std::to_string(::getpid()) + "-" +
                 std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

// Two-node, two-site toy topology with a single known RTT.
inline Topology toy_topology(double rtt_s = 0.010) {
    Topology t;
    t.sites = {{"site-a", {"node-a"}}, {"site-b", {"node-b"}}};
    t.intra_site_rtt_s = 0.0001;
    t.inter_site_rtt_s = {{{"site-a", "site-b"}, rtt_s}};
    t.capacities = {{"node-a", NodeCapacity{}}, {"node-b", NodeCapacity{}}};
    return t;
}

} // namespace netsched::testing
