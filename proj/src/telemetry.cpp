#include "netsched/telemetry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

namespace netsched {

using nlohmann::json;

RttStats rtt_stats(std::span<const double> rtts_s) {
    if (rtts_s.empty()) throw ValidationError("no peers");
    double sum = 0.0;
    double max = 0.0;
    for (double v : rtts_s) {
        if (!std::isfinite(v) || v < 0.0)
            throw ValidationError("invalid telemetry: rtt value " + std::to_string(v));
        sum += v;
        max = std::max(max, v);
    }
    const double n = static_cast<double>(rtts_s.size());
    const double mean = sum / n;
    double sq = 0.0;
    for (double v : rtts_s) sq += (v - mean) * (v - mean);
    return RttStats{mean, max, std::sqrt(sq / n)};
}

std::vector<NodeId> ClusterSnapshot::node_ids() const {
    std::vector<NodeId> ids;
    ids.reserve(nodes.size());
    for (const auto& [id, unused] : nodes) ids.push_back(id);
    return ids;
}

namespace {

void check_metric(const NodeId& node, const char* field, double v) {
    if (!std::isfinite(v) || v < 0.0)
        throw ValidationError("invalid telemetry: node " + node + " field " + field +
                              " = " + std::to_string(v));
}

} // namespace

void validate(const ClusterSnapshot& snapshot) {
    if (!std::isfinite(snapshot.timestamp_s) || snapshot.timestamp_s < 0.0)
        throw ValidationError("invalid telemetry: timestamp");
    if (snapshot.nodes.size() < 2)
        throw ValidationError("snapshot needs at least 2 nodes, got " +
                              std::to_string(snapshot.nodes.size()));
    for (const auto& [id, t] : snapshot.nodes) {
        if (id.empty()) throw ValidationError("empty node name");
        check_metric(id, "tx_bps", t.tx_bps);
        check_metric(id, "rx_bps", t.rx_bps);
        check_metric(id, "cpu_load1", t.cpu_load1);
        check_metric(id, "mem_available_bytes", t.mem_available_bytes);
        if (t.rtt_to_peers_s.count(id))
            throw ValidationError("node " + id + " lists an rtt to itself");
        // Full mesh: the peer set must be exactly "every other node".
        if (t.rtt_to_peers_s.size() != snapshot.nodes.size() - 1)
            throw ValidationError("node " + id + " has " +
                                  std::to_string(t.rtt_to_peers_s.size()) +
                                  " peer rtts, expected " +
                                  std::to_string(snapshot.nodes.size() - 1));
        for (const auto& [peer, rtt] : t.rtt_to_peers_s) {
            if (!snapshot.nodes.count(peer))
                throw ValidationError("node " + id + " has rtt to unknown peer " + peer);
            check_metric(id, ("rtt_s[" + peer + "]").c_str(), rtt);
        }
    }
}

json snapshot_to_json(const ClusterSnapshot& snapshot) {
    json nodes = json::object();
    for (const auto& [id, t] : snapshot.nodes) {
        json rtt = json::object();
        for (const auto& [peer, v] : t.rtt_to_peers_s) rtt[peer] = v;
        nodes[id] = {{"rtt_s", rtt},
                     {"tx_bps", t.tx_bps},
                     {"rx_bps", t.rx_bps},
                     {"cpu_load1", t.cpu_load1},
                     {"mem_available_bytes", t.mem_available_bytes}};
    }
    return json{{"timestamp", snapshot.timestamp_s}, {"nodes", nodes}};
}

namespace {

double require_number(const json& j, const std::string& context, const char* key) {
    if (!j.contains(key))
        throw ParseError("snapshot: node " + context + " is missing field " + key);
    const json& v = j.at(key);
    if (!v.is_number())
        throw ParseError("snapshot: node " + context + " field " + std::string(key) +
                         " is not a number");
    return v.get<double>();
}

} // namespace

ClusterSnapshot snapshot_from_json(const json& j) {
    if (!j.is_object() || !j.contains("timestamp") || !j.contains("nodes"))
        throw ParseError("snapshot: expected object with 'timestamp' and 'nodes'");
    if (!j.at("timestamp").is_number())
        throw ParseError("snapshot: 'timestamp' is not a number");
    if (!j.at("nodes").is_object())
        throw ParseError("snapshot: 'nodes' is not an object");

    ClusterSnapshot snap;
    snap.timestamp_s = j.at("timestamp").get<double>();
    for (const auto& [id, nj] : j.at("nodes").items()) {
        NodeTelemetry t;
        t.tx_bps = require_number(nj, id, "tx_bps");
        t.rx_bps = require_number(nj, id, "rx_bps");
        t.cpu_load1 = require_number(nj, id, "cpu_load1");
        t.mem_available_bytes = require_number(nj, id, "mem_available_bytes");
        if (!nj.contains("rtt_s") || !nj.at("rtt_s").is_object())
            throw ParseError("snapshot: node " + id + " is missing the 'rtt_s' map");
        for (const auto& [peer, v] : nj.at("rtt_s").items()) {
            if (!v.is_number())
                throw ParseError("snapshot: node " + id + " rtt to " + peer +
                                 " is not a number");
            t.rtt_to_peers_s[peer] = v.get<double>();
        }
        snap.nodes[id] = std::move(t);
    }
    validate(snap);
    return snap;
}

ClusterSnapshot load_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open snapshot file " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError("snapshot " + path.string() + ": " + e.what());
    }
    return snapshot_from_json(j);
}

void save_snapshot(const ClusterSnapshot& snapshot, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write snapshot file " + path.string());
    out << snapshot_to_json(snapshot).dump(2) << "\n";
}

} // namespace netsched
