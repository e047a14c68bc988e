#include "netsched/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

namespace netsched {

using nlohmann::json;

Topology Topology::three_site_default() {
    Topology t;
    t.sites = {{"site-1", {"node-1", "node-2"}},
               {"site-2", {"node-3", "node-4"}},
               {"site-3", {"node-5", "node-6"}}};
    t.intra_site_rtt_s = 0.0003;
    t.inter_site_rtt_s = {{{"site-1", "site-2"}, 0.011},
                          {{"site-1", "site-3"}, 0.031},
                          {{"site-2", "site-3"}, 0.065}};
    for (const auto& site : t.sites)
        for (const auto& node : site.nodes) t.capacities[node] = NodeCapacity{};
    return t;
}

std::vector<NodeId> Topology::node_ids() const {
    std::vector<NodeId> ids;
    for (const auto& site : sites)
        for (const auto& node : site.nodes) ids.push_back(node);
    std::sort(ids.begin(), ids.end());
    return ids;
}

const std::string& Topology::site_of(const NodeId& node) const {
    for (const auto& site : sites)
        for (const auto& n : site.nodes)
            if (n == node) return site.name;
    throw ValidationError("unknown node " + node);
}

double Topology::base_rtt_s(const NodeId& a, const NodeId& b) const {
    const std::string& sa = site_of(a);
    const std::string& sb = site_of(b);
    if (sa == sb) return intra_site_rtt_s;
    const auto key = std::minmax(sa, sb);
    const auto it = inter_site_rtt_s.find({key.first, key.second});
    if (it == inter_site_rtt_s.end())
        throw ValidationError("no rtt configured between sites " + sa + " and " + sb);
    return it->second;
}

NodeCapacity Topology::capacity(const NodeId& node) const {
    const auto it = capacities.find(node);
    return it != capacities.end() ? it->second : NodeCapacity{};
}

void Topology::validate() const {
    if (sites.empty()) throw ValidationError("topology has no sites");
    std::set<std::string> site_names;
    std::set<NodeId> node_names;
    std::size_t node_count = 0;
    for (const auto& site : sites) {
        if (site.name.empty()) throw ValidationError("topology has an unnamed site");
        if (!site_names.insert(site.name).second)
            throw ValidationError("duplicate site name " + site.name);
        if (site.nodes.empty())
            throw ValidationError("site " + site.name + " has no nodes");
        for (const auto& node : site.nodes) {
            if (node.empty()) throw ValidationError("empty node name in site " + site.name);
            if (!node_names.insert(node).second)
                throw ValidationError("duplicate node name " + node);
            ++node_count;
        }
    }
    if (node_count < 2) throw ValidationError("topology needs at least 2 nodes");
    if (!(intra_site_rtt_s > 0.0)) throw ValidationError("intra_site_rtt_s must be > 0");
    for (const auto& a : site_names) {
        for (const auto& b : site_names) {
            if (a >= b) continue;
            const auto it = inter_site_rtt_s.find({a, b});
            if (it == inter_site_rtt_s.end())
                throw ValidationError("missing inter-site rtt for " + a + " / " + b);
            if (!(it->second > 0.0))
                throw ValidationError("inter-site rtt for " + a + " / " + b + " must be > 0");
            if (it->second <= intra_site_rtt_s)
                throw ValidationError("inter-site rtt for " + a + " / " + b +
                                      " must exceed the intra-site rtt");
        }
    }
    for (const auto& [key, unused] : inter_site_rtt_s) {
        if (!site_names.count(key.first) || !site_names.count(key.second))
            throw ValidationError("inter-site rtt references unknown site " + key.first +
                                  " / " + key.second);
    }
    for (const auto& [node, cap] : capacities) {
        if (!node_names.count(node))
            throw ValidationError("capacity for unknown node " + node);
        if (!(cap.cpu_total > 0.0) || !(cap.mem_total_bytes > 0.0))
            throw ValidationError("node " + node + " capacity must be positive");
    }
}

void OracleParams::validate() const {
    for (const auto& app : apps)
        if (!(app.base_seconds > 0.0) || !(app.bytes_per_record > 0.0))
            throw ValidationError("oracle app params must be positive");
    if (!(executor_alpha > 0.0)) throw ValidationError("executor_alpha must be > 0");
    if (!(beta_net > 0.0) || !(beta_cpu > 0.0) || !(beta_rtt > 0.0))
        throw ValidationError("oracle beta coefficients must be > 0");
    if (!(rtt_ref_s > 0.0)) throw ValidationError("rtt_ref_s must be > 0");
    if (!(bw_cap_bps > 0.0)) throw ValidationError("bw_cap_bps must be > 0");
    if (noise_sigma < 0.0) throw ValidationError("noise_sigma must be >= 0");
    if (!(bg_net_mean_bps > 0.0)) throw ValidationError("bg_net_mean_bps must be > 0");
    if (bg_cpu_min < 0.0 || bg_cpu_max < bg_cpu_min)
        throw ValidationError("bg_cpu range must satisfy 0 <= min <= max");
    if (idle_net_bps < 0.0 || idle_cpu_load < 0.0)
        throw ValidationError("idle levels must be >= 0");
    if (rtt_load_gamma < 0.0) throw ValidationError("rtt_load_gamma must be >= 0");
    if (!(join_skew_factor >= 1.0)) throw ValidationError("join_skew_factor must be >= 1");
}

SimCluster::SimCluster(Topology topology, OracleParams params, std::uint64_t seed)
    : topology_(std::move(topology)), params_(std::move(params)), rng_(seed) {
    topology_.validate();
    params_.validate();
    ids_ = topology_.node_ids();
    for (const auto& id : ids_) state_[id] = NodeState{};
    join_skew_node_ = ids_[rng_.uniform_index(ids_.size())];
}

const NodeState& SimCluster::state(const NodeId& node) const {
    const auto it = state_.find(node);
    if (it == state_.end()) throw ValidationError("unknown node " + node);
    return it->second;
}

void SimCluster::apply_background_load(double intensity) {
    if (!(intensity >= 0.0) || intensity > 1.0)
        throw ValidationError("background intensity must be in [0, 1]");
    for (auto& [id, st] : state_) st = NodeState{};
    const auto k = static_cast<std::size_t>(
        std::ceil(intensity * static_cast<double>(ids_.size())));
    if (k == 0) return;
    const auto picked = rng_.sample_without_replacement(ids_.size(), k);
    std::vector<bool> loaded(ids_.size(), false);
    for (std::size_t p : picked) loaded[p] = true;
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        if (!loaded[i]) continue;
        NodeState& st = state_[ids_[i]];
        st.bg_net_bps = params_.bg_net_mean_bps * rng_.uniform(0.5, 1.5);
        st.bg_cpu_load = rng_.uniform(params_.bg_cpu_min, params_.bg_cpu_max);
    }
}

void SimCluster::set_background(const NodeId& node, double bg_net_bps, double bg_cpu_load,
                                double mem_used_bytes) {
    const auto it = state_.find(node);
    if (it == state_.end()) throw ValidationError("unknown node " + node);
    if (bg_net_bps < 0.0 || bg_cpu_load < 0.0 || mem_used_bytes < 0.0)
        throw ValidationError("background state must be >= 0");
    if (mem_used_bytes > topology_.capacity(node).mem_total_bytes)
        throw ValidationError("mem_used_bytes exceeds node capacity");
    it->second = NodeState{bg_cpu_load, bg_net_bps, mem_used_bytes};
}

double SimCluster::loaded_rtt_s(const NodeId& a, const NodeId& b) const {
    const double base = topology_.base_rtt_s(a, b);
    const double bg = state(a).bg_net_bps + state(b).bg_net_bps;
    return base * (1.0 + params_.rtt_load_gamma * bg / params_.bw_cap_bps);
}

double SimCluster::noiseless_rtt_mean_s(const NodeId& node) const {
    double sum = 0.0;
    std::size_t peers = 0;
    for (const auto& id : ids_) {
        if (id == node) continue;
        sum += loaded_rtt_s(node, id);
        ++peers;
    }
    if (peers == 0) throw ValidationError("node " + node + " has no peers");
    return sum / static_cast<double>(peers);
}

ClusterSnapshot SimCluster::sample_snapshot() {
    ClusterSnapshot snap;
    snap.timestamp_s = now_s_;
    const double sigma = params_.noise_sigma;
    auto observe = [&](double true_value) {
        return true_value * std::max(0.0, 1.0 + sigma * rng_.normal(0.0, 1.0));
    };
    for (const auto& id : ids_) {
        const NodeState& st = state_.at(id);
        NodeTelemetry t;
        for (const auto& peer : ids_) {
            if (peer == id) continue;
            t.rtt_to_peers_s[peer] = observe(loaded_rtt_s(id, peer));
        }
        const double net_true = st.bg_net_bps + params_.idle_net_bps;
        const double cpu_true = st.bg_cpu_load + params_.idle_cpu_load;
        const double mem_true =
            topology_.capacity(id).mem_total_bytes - st.mem_used_bytes;
        t.tx_bps = observe(net_true);
        t.rx_bps = observe(net_true);
        t.cpu_load1 = observe(cpu_true);
        t.mem_available_bytes = observe(mem_true);
        snap.nodes[id] = std::move(t);
    }
    validate(snap);
    return snap;
}

double SimCluster::noiseless_duration(const JobSpec& job, const NodeId& node) const {
    netsched::validate(job);
    const NodeState& st = state(node);
    const AppParams& app = params_.app(job.app);
    const double shuffle_bytes = app.bytes_per_record * static_cast<double>(job.input_size);
    const double bw_eff =
        std::max(params_.bw_cap_bps - st.bg_net_bps, params_.bw_cap_bps / 100.0);
    const double cpu_total = topology_.capacity(node).cpu_total;
    const double rtt_mean = noiseless_rtt_mean_s(node);

    double d = app.base_seconds * (static_cast<double>(job.input_size) / 1e5) /
               std::pow(static_cast<double>(job.executor_count), params_.executor_alpha);
    d *= 1.0 + params_.beta_net * shuffle_bytes / bw_eff;
    d *= 1.0 + params_.beta_cpu * st.bg_cpu_load / cpu_total;
    d *= 1.0 + params_.beta_rtt * rtt_mean / params_.rtt_ref_s;
    if (job.app == AppType::Join && node == join_skew_node_) d *= params_.join_skew_factor;
    return d;
}

double SimCluster::oracle_duration(const JobSpec& job, const NodeId& node, bool noiseless) {
    const double d = noiseless_duration(job, node);
    if (noiseless) return d;
    return d * rng_.lognormal(0.0, params_.noise_sigma);
}

SimulatedRun SimCluster::run_job(const JobSpec& job, const NodeId& node) {
    SimulatedRun run;
    run.job = job;
    run.node = node;
    run.snapshot_before = sample_snapshot();
    run.duration_s = oracle_duration(job, node, /*noiseless=*/false);
    now_s_ += run.duration_s;
    return run;
}

std::map<NodeId, double> SimCluster::counterfactual_durations(const JobSpec& job) const {
    std::map<NodeId, double> durations;
    for (const auto& id : ids_) durations[id] = noiseless_duration(job, id);
    return durations;
}

namespace {

json topology_to_json(const Topology& t) {
    json sites = json::array();
    for (const auto& site : t.sites)
        sites.push_back(json{{"name", site.name}, {"nodes", site.nodes}});
    json inter = json::object();
    for (const auto& [key, rtt] : t.inter_site_rtt_s)
        inter[key.first + "|" + key.second] = rtt;
    json caps = json::object();
    for (const auto& [node, cap] : t.capacities)
        caps[node] = json{{"cpu_total", cap.cpu_total}, {"mem_total_bytes", cap.mem_total_bytes}};
    return json{{"sites", sites},
                {"intra_site_rtt_s", t.intra_site_rtt_s},
                {"inter_site_rtt_s", inter},
                {"capacities", caps}};
}

Topology topology_from_json(const json& j) {
    Topology t;
    t.capacities.clear();
    try {
        for (const json& sj : j.at("sites")) {
            Topology::Site site;
            site.name = sj.at("name").get<std::string>();
            site.nodes = sj.at("nodes").get<std::vector<NodeId>>();
            t.sites.push_back(std::move(site));
        }
        t.intra_site_rtt_s = j.value("intra_site_rtt_s", t.intra_site_rtt_s);
        if (j.contains("inter_site_rtt_s")) {
            for (const auto& [key, rtt] : j.at("inter_site_rtt_s").items()) {
                const auto sep = key.find('|');
                if (sep == std::string::npos)
                    throw ParseError("inter_site_rtt_s keys must look like \"siteA|siteB\"");
                std::string a = key.substr(0, sep);
                std::string b = key.substr(sep + 1);
                if (b < a) std::swap(a, b);
                t.inter_site_rtt_s[{std::move(a), std::move(b)}] = rtt.get<double>();
            }
        }
        if (j.contains("capacities")) {
            for (const auto& [node, cj] : j.at("capacities").items()) {
                NodeCapacity cap;
                cap.cpu_total = cj.value("cpu_total", cap.cpu_total);
                cap.mem_total_bytes = cj.value("mem_total_bytes", cap.mem_total_bytes);
                t.capacities[node] = cap;
            }
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("topology: ") + e.what());
    }
    t.validate();
    return t;
}

json oracle_to_json(const OracleParams& p) {
    json apps = json::object();
    for (AppType a : kAllAppTypes) {
        apps[std::string(to_string(a))] = json{{"base_seconds", p.app(a).base_seconds},
                                               {"bytes_per_record", p.app(a).bytes_per_record}};
    }
    return json{{"apps", apps},
                {"executor_alpha", p.executor_alpha},
                {"beta_net", p.beta_net},
                {"beta_cpu", p.beta_cpu},
                {"beta_rtt", p.beta_rtt},
                {"rtt_ref_s", p.rtt_ref_s},
                {"bw_cap_bps", p.bw_cap_bps},
                {"noise_sigma", p.noise_sigma},
                {"bg_net_mean_bps", p.bg_net_mean_bps},
                {"bg_cpu_min", p.bg_cpu_min},
                {"bg_cpu_max", p.bg_cpu_max},
                {"idle_net_bps", p.idle_net_bps},
                {"idle_cpu_load", p.idle_cpu_load},
                {"rtt_load_gamma", p.rtt_load_gamma},
                {"join_skew_factor", p.join_skew_factor}};
}

OracleParams oracle_from_json(const json& j) {
    OracleParams p;
    try {
        if (j.contains("apps")) {
            for (AppType a : kAllAppTypes) {
                const std::string name(to_string(a));
                if (!j.at("apps").contains(name)) continue;
                const json& aj = j.at("apps").at(name);
                p.app(a).base_seconds = aj.value("base_seconds", p.app(a).base_seconds);
                p.app(a).bytes_per_record =
                    aj.value("bytes_per_record", p.app(a).bytes_per_record);
            }
        }
        p.executor_alpha = j.value("executor_alpha", p.executor_alpha);
        p.beta_net = j.value("beta_net", p.beta_net);
        p.beta_cpu = j.value("beta_cpu", p.beta_cpu);
        p.beta_rtt = j.value("beta_rtt", p.beta_rtt);
        p.rtt_ref_s = j.value("rtt_ref_s", p.rtt_ref_s);
        p.bw_cap_bps = j.value("bw_cap_bps", p.bw_cap_bps);
        p.noise_sigma = j.value("noise_sigma", p.noise_sigma);
        p.bg_net_mean_bps = j.value("bg_net_mean_bps", p.bg_net_mean_bps);
        p.bg_cpu_min = j.value("bg_cpu_min", p.bg_cpu_min);
        p.bg_cpu_max = j.value("bg_cpu_max", p.bg_cpu_max);
        p.idle_net_bps = j.value("idle_net_bps", p.idle_net_bps);
        p.idle_cpu_load = j.value("idle_cpu_load", p.idle_cpu_load);
        p.rtt_load_gamma = j.value("rtt_load_gamma", p.rtt_load_gamma);
        p.join_skew_factor = j.value("join_skew_factor", p.join_skew_factor);
    } catch (const json::exception& e) {
        throw ParseError(std::string("oracle params: ") + e.what());
    }
    p.validate();
    return p;
}

} // namespace

json sim_config_to_json(const SimConfig& config) {
    return json{{"topology", topology_to_json(config.topology)},
                {"oracle", oracle_to_json(config.oracle)}};
}

SimConfig sim_config_from_json(const json& j) {
    if (!j.is_object()) throw ParseError("sim config: expected a JSON object");
    SimConfig config;
    if (j.contains("topology")) config.topology = topology_from_json(j.at("topology"));
    if (j.contains("oracle")) config.oracle = oracle_from_json(j.at("oracle"));
    return config;
}

SimConfig load_sim_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError("config " + path.string() + ": " + e.what());
    }
    return sim_config_from_json(j);
}

} // namespace netsched
