#include "netsched/features.hpp"

namespace netsched {

std::string_view to_string(AppType app) {
    switch (app) {
        case AppType::Sort: return "sort";
        case AppType::PageRank: return "pagerank";
        case AppType::Join: return "join";
    }
    throw Error("unreachable app type");
}

AppType app_type_from_string(std::string_view name) {
    if (name == "sort") return AppType::Sort;
    if (name == "pagerank") return AppType::PageRank;
    if (name == "join") return AppType::Join;
    throw ParseError("unknown app type '" + std::string(name) + "'");
}

void validate(const JobSpec& job) {
    if (job.input_size < 1) throw ValidationError("job input_size must be >= 1");
    if (job.executor_count < 1) throw ValidationError("job executor_count must be >= 1");
    if (job.executor_memory_mb < 1)
        throw ValidationError("job executor_memory_mb must be >= 1");
}

const std::vector<std::string>& feature_names() {
    static const std::vector<std::string> names = {
        "rtt_mean_s",   "rtt_max_s",      "rtt_std_s",
        "tx_bps",       "rx_bps",         "cpu_load1",
        "mem_available_bytes", "app_is_sort", "app_is_pagerank",
        "app_is_join",  "input_size",     "executor_count",
        "executor_memory_mb"};
    return names;
}

std::array<double, 3> encode_app_type(AppType app) {
    std::array<double, 3> onehot = {0.0, 0.0, 0.0};
    onehot[static_cast<std::size_t>(app)] = 1.0;
    return onehot;
}

FeatureVector build_features(const NodeId& node, const ClusterSnapshot& snapshot,
                             const JobSpec& job) {
    const auto it = snapshot.nodes.find(node);
    if (it == snapshot.nodes.end())
        throw ValidationError("node not in snapshot: " + node);
    validate(job);

    const NodeTelemetry& t = it->second;
    std::vector<double> rtts;
    rtts.reserve(t.rtt_to_peers_s.size());
    for (const auto& [peer, v] : t.rtt_to_peers_s) rtts.push_back(v);
    const RttStats rtt = rtt_stats(rtts);
    const auto onehot = encode_app_type(job.app);

    return FeatureVector{rtt.mean_s,
                         rtt.max_s,
                         rtt.std_s,
                         t.tx_bps,
                         t.rx_bps,
                         t.cpu_load1,
                         t.mem_available_bytes,
                         onehot[0],
                         onehot[1],
                         onehot[2],
                         static_cast<double>(job.input_size),
                         static_cast<double>(job.executor_count),
                         static_cast<double>(job.executor_memory_mb)};
}

} // namespace netsched
