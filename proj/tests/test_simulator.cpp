#include <doctest.h>

#include <set>

#include <nlohmann/json.hpp>

#include "helpers.hpp"
#include "netsched/rng.hpp"
#include "netsched/simulator.hpp"

using namespace netsched;

namespace {

OracleParams noiseless_params() {
    OracleParams p;
    p.noise_sigma = 0.0;
    return p;
}

} // namespace

TEST_SUITE_BEGIN("simulator");

TEST_CASE("default topology: 3 sites, 6 nodes, symmetric positive rtt mesh") {
    const Topology t = Topology::three_site_default();
    t.validate();
    const auto ids = t.node_ids();
    REQUIRE(ids.size() == 6);
    CHECK(t.sites.size() == 3);

    std::set<std::pair<NodeId, NodeId>> unordered_pairs;
    for (const auto& a : ids) {
        for (const auto& b : ids) {
            if (a == b) continue;
            CHECK(t.base_rtt_s(a, b) == t.base_rtt_s(b, a));
            CHECK(t.base_rtt_s(a, b) > 0.0);
            unordered_pairs.insert({std::min(a, b), std::max(a, b)});
        }
    }
    CHECK(unordered_pairs.size() == 15);
    CHECK(t.base_rtt_s("node-1", "node-2") == t.intra_site_rtt_s);
    CHECK(t.base_rtt_s("node-1", "node-3") > t.intra_site_rtt_s);
}

TEST_CASE("invalid topologies are rejected") {
    SUBCASE("duplicate node name") {
        Topology t = Topology::three_site_default();
        t.sites[1].nodes[0] = "node-1";
        CHECK_THROWS_AS(SimCluster(t, OracleParams{}, 1), ValidationError);
    }
    SUBCASE("missing inter-site rtt") {
        Topology t = Topology::three_site_default();
        t.inter_site_rtt_s.erase({"site-1", "site-3"});
        CHECK_THROWS_AS(t.validate(), ValidationError);
    }
    SUBCASE("intra-site rtt must be below inter-site") {
        Topology t = Topology::three_site_default();
        t.intra_site_rtt_s = 0.2;
        CHECK_THROWS_AS(t.validate(), ValidationError);
    }
}

TEST_CASE("same seed reproduces telemetry and duration sequences exactly") {
    SimCluster a(Topology::three_site_default(), OracleParams{}, 77);
    SimCluster b(Topology::three_site_default(), OracleParams{}, 77);
    CHECK(a.join_skew_node() == b.join_skew_node());
    const JobSpec job{AppType::Sort, 500000, 2, 512};
    for (int i = 0; i < 5; ++i) {
        a.apply_background_load(0.5);
        b.apply_background_load(0.5);
        const SimulatedRun ra = a.run_job(job, "node-3");
        const SimulatedRun rb = b.run_job(job, "node-3");
        CHECK(ra.duration_s == rb.duration_s);
        CHECK(ra.snapshot_before.timestamp_s == rb.snapshot_before.timestamp_s);
        for (const auto& [id, t] : ra.snapshot_before.nodes) {
            const NodeTelemetry& tb = rb.snapshot_before.nodes.at(id);
            CHECK(t.tx_bps == tb.tx_bps);
            CHECK(t.cpu_load1 == tb.cpu_load1);
            CHECK(t.rtt_to_peers_s == tb.rtt_to_peers_s);
        }
    }
}

TEST_CASE("background load intensity bounds") {
    SimCluster cluster(Topology::three_site_default(), OracleParams{}, 5);
    SUBCASE("intensity 0 clears everything") {
        cluster.apply_background_load(1.0);
        cluster.apply_background_load(0.0);
        for (const auto& id : cluster.node_ids()) {
            CHECK(cluster.state(id).bg_net_bps == 0.0);
            CHECK(cluster.state(id).bg_cpu_load == 0.0);
        }
    }
    SUBCASE("intensity 1 loads every node") {
        cluster.apply_background_load(1.0);
        for (const auto& id : cluster.node_ids()) CHECK(cluster.state(id).bg_net_bps > 0.0);
    }
    SUBCASE("out-of-range intensity") {
        CHECK_THROWS_AS(cluster.apply_background_load(-0.1), ValidationError);
        CHECK_THROWS_AS(cluster.apply_background_load(1.5), ValidationError);
    }
}

TEST_CASE("load selection and draws match a reimplementation of the stream") {
    const std::uint64_t seed = 20240601;
    SimCluster cluster(Topology::three_site_default(), OracleParams{}, seed);
    cluster.apply_background_load(0.5);

    std::size_t loaded_count = 0;
    for (const auto& id : cluster.node_ids())
        if (cluster.state(id).bg_net_bps > 0.0) ++loaded_count;
    CHECK(loaded_count == 3); // ceil(0.5 * 6)

    // Re-derive the draws: construction consumes one uniform_index(6) for the
    // join-skew node; apply_background_load then runs a partial Fisher-Yates
    // (one uniform_index per pick) and two uniform draws per loaded node in
    // sorted node order.
    RandomStream mirror(seed);
    mirror.uniform_index(6); // skew-node draw
    std::vector<std::size_t> pool = {0, 1, 2, 3, 4, 5};
    std::vector<bool> loaded(6, false);
    for (std::size_t i = 0; i < 3; ++i) {
        const std::size_t j = i + mirror.uniform_index(6 - i);
        std::swap(pool[i], pool[j]);
        loaded[pool[i]] = true;
    }
    const OracleParams params;
    const auto ids = cluster.node_ids();
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const NodeState& st = cluster.state(ids[i]);
        if (!loaded[i]) {
            CHECK(st.bg_net_bps == 0.0);
            continue;
        }
        const double expected_net = params.bg_net_mean_bps * mirror.uniform(0.5, 1.5);
        const double expected_cpu = mirror.uniform(params.bg_cpu_min, params.bg_cpu_max);
        CHECK(st.bg_net_bps == expected_net);
        CHECK(st.bg_cpu_load == expected_cpu);
    }
}

TEST_CASE("noiseless unloaded snapshot equals the documented formulas exactly") {
    SimCluster cluster(Topology::three_site_default(), noiseless_params(), 3);
    cluster.apply_background_load(0.0);
    const ClusterSnapshot snap = cluster.sample_snapshot();
    const Topology topo = Topology::three_site_default();
    const OracleParams params = noiseless_params();
    for (const auto& [id, t] : snap.nodes) {
        for (const auto& [peer, rtt] : t.rtt_to_peers_s)
            CHECK(rtt == topo.base_rtt_s(id, peer));
        CHECK(t.tx_bps == params.idle_net_bps);
        CHECK(t.rx_bps == params.idle_net_bps);
        CHECK(t.cpu_load1 == params.idle_cpu_load);
        CHECK(t.mem_available_bytes == topo.capacity(id).mem_total_bytes);
    }
}

TEST_CASE("noiseless snapshot under load matches hand-applied formulas") {
    SimCluster cluster(testing::toy_topology(0.020), noiseless_params(), 11);
    cluster.set_background("node-a", 2.0e8, 1.2);
    const ClusterSnapshot snap = cluster.sample_snapshot();
    const OracleParams p = noiseless_params();

    // rtt(a->b) = base * (1 + gamma * (bg_a + bg_b) / bw_cap)
    const double expected_rtt = 0.020 * (1.0 + 0.5 * (2.0e8 + 0.0) / 1.25e9);
    CHECK(snap.nodes.at("node-a").rtt_to_peers_s.at("node-b") ==
          doctest::Approx(expected_rtt).epsilon(1e-15));
    CHECK(snap.nodes.at("node-b").rtt_to_peers_s.at("node-a") ==
          doctest::Approx(expected_rtt).epsilon(1e-15));
    CHECK(snap.nodes.at("node-a").tx_bps == 2.0e8 + p.idle_net_bps);
    CHECK(snap.nodes.at("node-a").cpu_load1 == 1.2 + p.idle_cpu_load);
    CHECK(snap.nodes.at("node-b").tx_bps == p.idle_net_bps);
}

TEST_CASE("loaded nodes show strictly higher tx than unloaded ones (noiseless)") {
    SimCluster cluster(Topology::three_site_default(), noiseless_params(), 23);
    cluster.apply_background_load(0.5);
    const ClusterSnapshot snap = cluster.sample_snapshot();
    double min_loaded = std::numeric_limits<double>::infinity();
    double max_unloaded = 0.0;
    for (const auto& id : cluster.node_ids()) {
        const double tx = snap.nodes.at(id).tx_bps;
        if (cluster.state(id).bg_net_bps > 0.0)
            min_loaded = std::min(min_loaded, tx);
        else
            max_unloaded = std::max(max_unloaded, tx);
    }
    CHECK(min_loaded > max_unloaded);
}

TEST_CASE("snapshot rtt is symmetric in noiseless mode") {
    SimCluster cluster(Topology::three_site_default(), noiseless_params(), 29);
    cluster.apply_background_load(1.0 / 3.0);
    const ClusterSnapshot snap = cluster.sample_snapshot();
    for (const auto& [a, ta] : snap.nodes)
        for (const auto& [b, rtt] : ta.rtt_to_peers_s)
            CHECK(rtt == snap.nodes.at(b).rtt_to_peers_s.at(a));
}

TEST_CASE("oracle duration follows the documented formula at zero load") {
    // Toy pair at exactly the reference RTT: mean peer rtt == rtt_ref, so the
    // rtt factor is (1 + beta_rtt) and the duration is the calibrated anchor.
    SimCluster cluster(testing::toy_topology(0.010), noiseless_params(), 31);
    const JobSpec job{AppType::Sort, 100000, 1, 512};
    const OracleParams p;
    const double shuffle = p.app(AppType::Sort).bytes_per_record * 1e5;
    const double expected = p.app(AppType::Sort).base_seconds *
                            (1.0 + p.beta_net * shuffle / p.bw_cap_bps) * (1.0 + p.beta_rtt);
    const double d = cluster.oracle_duration(job, "node-a");
    CHECK(d == doctest::Approx(expected).epsilon(1e-12));
    CHECK(d == doctest::Approx(18.18).epsilon(1e-6));
}

TEST_CASE("doubling the input doubles both the base factor and the shuffle term") {
    SimCluster cluster(testing::toy_topology(0.010), noiseless_params(), 31);
    const JobSpec small{AppType::PageRank, 250000, 1, 512};
    JobSpec big = small;
    big.input_size = 500000;
    const OracleParams p;
    const double bpr = p.app(AppType::PageRank).bytes_per_record;
    const double d_small = cluster.oracle_duration(small, "node-a");
    const double d_big = cluster.oracle_duration(big, "node-a");
    const double shuffle_small = bpr * 250000.0;
    const double ratio = 2.0 * (1.0 + p.beta_net * 2.0 * shuffle_small / p.bw_cap_bps) /
                         (1.0 + p.beta_net * shuffle_small / p.bw_cap_bps);
    CHECK(d_big / d_small == doctest::Approx(ratio).epsilon(1e-12));
}

TEST_CASE("duration is monotone in background load, cpu, and rtt") {
    const JobSpec job{AppType::Sort, 1000000, 2, 512};
    SUBCASE("network load") {
        SimCluster cluster(testing::toy_topology(), noiseless_params(), 37);
        double prev = -1.0;
        for (double bg : {0.0, 5e7, 2e8, 6e8, 1.24e9, 5e9}) {
            cluster.set_background("node-a", bg, 0.0);
            const double d = cluster.oracle_duration(job, "node-a");
            CHECK(d >= prev);
            prev = d;
        }
    }
    SUBCASE("cpu load") {
        SimCluster cluster(testing::toy_topology(), noiseless_params(), 37);
        double prev = -1.0;
        for (double cpu : {0.0, 0.5, 1.0, 3.0, 8.0}) {
            cluster.set_background("node-a", 0.0, cpu);
            const double d = cluster.oracle_duration(job, "node-a");
            CHECK(d > prev);
            prev = d;
        }
    }
    SUBCASE("rtt") {
        SimCluster near(testing::toy_topology(0.005), noiseless_params(), 37);
        SimCluster far(testing::toy_topology(0.050), noiseless_params(), 37);
        CHECK(far.oracle_duration(job, "node-a") > near.oracle_duration(job, "node-a"));
    }
    SUBCASE("executor count strictly decreases duration") {
        SimCluster cluster(testing::toy_topology(), noiseless_params(), 37);
        double prev = std::numeric_limits<double>::infinity();
        for (int execs : {1, 2, 4, 8}) {
            JobSpec j = job;
            j.executor_count = execs;
            const double d = cluster.oracle_duration(j, "node-a");
            CHECK(d < prev);
            prev = d;
        }
    }
}

TEST_CASE("join skew applies to exactly one drawn node") {
    SimCluster cluster(Topology::three_site_default(), noiseless_params(), 41);
    const NodeId skew = cluster.join_skew_node();
    const JobSpec join_job{AppType::Join, 100000, 1, 512};
    const JobSpec sort_job{AppType::Sort, 100000, 1, 512};

    const auto join_durations = cluster.counterfactual_durations(join_job);
    const auto sort_durations = cluster.counterfactual_durations(sort_job);
    const OracleParams p;
    for (const auto& id : cluster.node_ids()) {
        const double scale = join_durations.at(id) / sort_durations.at(id);
        const double base_ratio = p.app(AppType::Join).base_seconds /
                                  p.app(AppType::Sort).base_seconds;
        // bytes_per_record differ, so compare through the full formula ratio.
        const double shuffle_join = p.app(AppType::Join).bytes_per_record * 1e5;
        const double shuffle_sort = p.app(AppType::Sort).bytes_per_record * 1e5;
        const double net_ratio = (1.0 + p.beta_net * shuffle_join / p.bw_cap_bps) /
                                 (1.0 + p.beta_net * shuffle_sort / p.bw_cap_bps);
        const double expected = base_ratio * net_ratio * (id == skew ? p.join_skew_factor : 1.0);
        CHECK(scale == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("run_job in noiseless mode returns the oracle duration exactly") {
    SimCluster cluster(Topology::three_site_default(), noiseless_params(), 43);
    cluster.apply_background_load(0.5);
    const JobSpec job{AppType::Join, 500000, 1, 1024};
    const double expected = cluster.oracle_duration(job, "node-4");
    const SimulatedRun run = cluster.run_job(job, "node-4");
    CHECK(run.duration_s == expected);
    CHECK(run.snapshot_before.timestamp_s < cluster.now_s());
    CHECK(run.node == "node-4");
}

TEST_CASE("counterfactual argmin equals brute-force oracle evaluation") {
    SimCluster cluster(Topology::three_site_default(), OracleParams{}, 47);
    for (int trial = 0; trial < 10; ++trial) {
        cluster.apply_background_load(1.0 / 3.0);
        const JobSpec job{AppType::Sort, 1000000, 2, 512};
        const auto durations = cluster.counterfactual_durations(job);

        NodeId best_map;
        double best_value = std::numeric_limits<double>::infinity();
        for (const auto& [node, d] : durations) {
            if (d < best_value) {
                best_value = d;
                best_map = node;
            }
        }
        NodeId best_brute;
        double brute_value = std::numeric_limits<double>::infinity();
        for (const auto& id : cluster.node_ids()) {
            const double d = cluster.oracle_duration(job, id, /*noiseless=*/true);
            CHECK(d == durations.at(id));
            if (d < brute_value) {
                brute_value = d;
                best_brute = id;
            }
        }
        CHECK(best_map == best_brute);
    }
}

TEST_CASE("with uniform state, durations differ only through the rtt term") {
    SimCluster cluster(Topology::three_site_default(), noiseless_params(), 53);
    cluster.apply_background_load(0.0);
    const JobSpec job{AppType::PageRank, 500000, 2, 1024};
    const auto durations = cluster.counterfactual_durations(job);
    const OracleParams p;
    double common = 0.0;
    for (const auto& id : cluster.node_ids()) {
        const double rtt_mean = cluster.noiseless_rtt_mean_s(id);
        const double reduced = durations.at(id) / (1.0 + p.beta_rtt * rtt_mean / p.rtt_ref_s);
        if (common == 0.0)
            common = reduced;
        else
            CHECK(reduced == doctest::Approx(common).epsilon(1e-12));
    }
}

TEST_CASE("a single heavily loaded node has the maximum duration") {
    SimCluster cluster(Topology::three_site_default(), noiseless_params(), 59);
    cluster.set_background("node-2", 8e8, 3.0);
    const auto durations =
        cluster.counterfactual_durations(JobSpec{AppType::Sort, 5000000, 2, 512});
    for (const auto& [node, d] : durations)
        if (node != "node-2") CHECK(d < durations.at("node-2"));
}

TEST_CASE("high-rtt sites are slower than low-rtt sites under equal load") {
    SimCluster cluster(Topology::three_site_default(), noiseless_params(), 61);
    cluster.apply_background_load(0.0);
    const auto durations =
        cluster.counterfactual_durations(JobSpec{AppType::Sort, 1000000, 1, 512});
    // site-1 (node-1/2) has the lowest mean rtt, site-3 (node-5/6) the highest.
    CHECK(durations.at("node-1") < durations.at("node-3"));
    CHECK(durations.at("node-3") < durations.at("node-5"));
    CHECK(durations.at("node-1") == durations.at("node-2"));
}

TEST_CASE("sim config json round-trips and rejects malformed input") {
    const SimConfig config;
    const auto j = sim_config_to_json(config);
    const SimConfig back = sim_config_from_json(j);
    CHECK(back.topology.node_ids() == config.topology.node_ids());
    CHECK(back.oracle.bw_cap_bps == config.oracle.bw_cap_bps);
    CHECK(back.oracle.app(AppType::Sort).base_seconds ==
          config.oracle.app(AppType::Sort).base_seconds);

    auto bad = j;
    bad["oracle"]["noise_sigma"] = -1.0;
    CHECK_THROWS_AS(sim_config_from_json(bad), ValidationError);
    CHECK_THROWS_AS(load_sim_config("/nonexistent/config.json"), ParseError);
}

TEST_SUITE_END();
