#include "netsched/prometheus.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace netsched {

using nlohmann::json;

MetricQueryConfig load_query_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open query config " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError("query config " + path.string() + ": " + e.what());
    }
    MetricQueryConfig cfg;
    cfg.cpu_query = j.value("cpu_query", cfg.cpu_query);
    cfg.mem_query = j.value("mem_query", cfg.mem_query);
    cfg.tx_query = j.value("tx_query", cfg.tx_query);
    cfg.rx_query = j.value("rx_query", cfg.rx_query);
    cfg.rtt_query = j.value("rtt_query", cfg.rtt_query);
    cfg.node_label = j.value("node_label", cfg.node_label);
    cfg.rtt_source_label = j.value("rtt_source_label", cfg.rtt_source_label);
    cfg.rtt_target_label = j.value("rtt_target_label", cfg.rtt_target_label);
    cfg.timeout_s = j.value("timeout_s", cfg.timeout_s);
    if (cfg.timeout_s <= 0.0) throw ParseError("query config: timeout_s must be > 0");
    return cfg;
}

namespace {

struct Sample {
    std::map<std::string, std::string> labels;
    double value = 0.0;
};

double parse_sample_value(const json& value_pair, const std::string& query) {
    // Prometheus encodes instant values as [<unix_ts>, "<value>"].
    if (!value_pair.is_array() || value_pair.size() != 2 || !value_pair[1].is_string())
        throw ParseError("query '" + query + "': malformed sample value");
    const std::string text = value_pair[1].get<std::string>();
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
        throw ParseError("query '" + query + "': unparseable sample value '" + text + "'");
    return v;
}

std::vector<Sample> run_instant_query(httplib::Client& client, const std::string& query) {
    httplib::Params params{{"query", query}};
    const auto res = client.Get("/api/v1/query", params, httplib::Headers{});
    if (!res)
        throw NetworkError("query '" + query + "' failed: " + httplib::to_string(res.error()));
    if (res->status != 200)
        throw NetworkError("query '" + query + "' returned HTTP " + std::to_string(res->status));

    json j;
    try {
        j = json::parse(res->body);
    } catch (const json::exception& e) {
        throw ParseError("query '" + query + "': invalid JSON response: " + e.what());
    }
    if (j.value("status", "") != "success")
        throw NetworkError("query '" + query + "': endpoint reported status '" +
                           j.value("status", "<missing>") + "'");
    const json& data = j.value("data", json::object());
    if (data.value("resultType", "") != "vector" || !data.contains("result"))
        throw ParseError("query '" + query + "': expected an instant-vector result");

    std::vector<Sample> samples;
    for (const json& r : data.at("result")) {
        Sample s;
        const json metric = r.value("metric", json::object());
        for (const auto& [k, v] : metric.items())
            if (v.is_string()) s.labels[k] = v.get<std::string>();
        s.value = parse_sample_value(r.value("value", json()), query);
        samples.push_back(std::move(s));
    }
    return samples;
}

} // namespace

ClusterSnapshot fetch_snapshot(const std::string& base_url, const MetricQueryConfig& config) {
    const double fetch_start =
        std::chrono::duration<double>(std::chrono::system_clock::now().time_since_epoch())
            .count();

    httplib::Client client(base_url);
    const auto timeout = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::duration<double>(config.timeout_s));
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);

    struct Family {
        const char* metric_field;
        const std::string* query;
        std::map<NodeId, double> by_node;
    };
    Family families[4] = {{"cpu_load1", &config.cpu_query, {}},
                          {"mem_available_bytes", &config.mem_query, {}},
                          {"tx_bps", &config.tx_query, {}},
                          {"rx_bps", &config.rx_query, {}}};

    std::set<NodeId> nodes;
    for (Family& family : families) {
        for (const Sample& s : run_instant_query(client, *family.query)) {
            const auto it = s.labels.find(config.node_label);
            if (it == s.labels.end())
                throw ParseError("query '" + *family.query + "': sample without label '" +
                                 config.node_label + "'");
            family.by_node[it->second] = s.value;
            nodes.insert(it->second);
        }
    }

    std::map<std::pair<NodeId, NodeId>, double> rtt;
    for (const Sample& s : run_instant_query(client, config.rtt_query)) {
        const auto src = s.labels.find(config.rtt_source_label);
        const auto dst = s.labels.find(config.rtt_target_label);
        if (src == s.labels.end() || dst == s.labels.end())
            throw ParseError("query '" + config.rtt_query + "': sample without " +
                             config.rtt_source_label + "/" + config.rtt_target_label +
                             " labels");
        rtt[{src->second, dst->second}] = s.value;
        nodes.insert(src->second);
        nodes.insert(dst->second);
    }

    if (nodes.size() < 2)
        throw ValidationError("endpoint exposed " + std::to_string(nodes.size()) +
                              " nodes; need at least 2");

    // Completeness: every node must carry every metric and a full RTT mesh.
    ClusterSnapshot snap;
    snap.timestamp_s = fetch_start;
    for (const NodeId& node : nodes) {
        NodeTelemetry t;
        double* fields[4] = {&t.cpu_load1, &t.mem_available_bytes, &t.tx_bps, &t.rx_bps};
        for (std::size_t f = 0; f < 4; ++f) {
            const auto it = families[f].by_node.find(node);
            if (it == families[f].by_node.end())
                throw ValidationError("missing metric " + *families[f].query + " for " + node);
            *fields[f] = it->second;
        }
        for (const NodeId& peer : nodes) {
            if (peer == node) continue;
            const auto it = rtt.find({node, peer});
            if (it == rtt.end())
                throw ValidationError("missing rtt sample " + node + " -> " + peer);
            t.rtt_to_peers_s[peer] = it->second;
        }
        snap.nodes[node] = std::move(t);
    }
    validate(snap);
    return snap;
}

} // namespace netsched
