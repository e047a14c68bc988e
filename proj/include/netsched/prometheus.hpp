#pragma once

#include <filesystem>
#include <string>

#include "netsched/telemetry.hpp"

namespace netsched {

// Instant-query configuration for a Prometheus-compatible endpoint. One
// query string per metric family; per-node families are joined on
// node_label, the RTT mesh on (rtt_source_label, rtt_target_label).
struct MetricQueryConfig {
    std::string cpu_query = "node_load1";
    std::string mem_query = "node_memory_MemAvailable_bytes";
    std::string tx_query = "rate(node_network_transmit_bytes_total[1m])";
    std::string rx_query = "rate(node_network_receive_bytes_total[1m])";
    std::string rtt_query = "ping_rtt_mean_seconds";
    std::string node_label = "instance";
    std::string rtt_source_label = "source";
    std::string rtt_target_label = "target";
    double timeout_s = 5.0;
};

MetricQueryConfig load_query_config(const std::filesystem::path& path);

// Issues one GET <base>/api/v1/query per metric family and joins the results
// into a validated snapshot stamped with the fetch start time. Any node
// missing any metric, or any missing mesh entry, is an error -- telemetry is
// never imputed.
ClusterSnapshot fetch_snapshot(const std::string& base_url,
                               const MetricQueryConfig& config = {});

} // namespace netsched
