#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <nlohmann/json.hpp>

#include "netsched/harness.hpp"
#include "netsched/prometheus.hpp"
#include "netsched/simulator.hpp"

namespace py = pybind11;
using namespace netsched;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Telemetry-aware job placement: duration models, node ranking and "
              "a deterministic geo-distributed cluster simulator";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<SchemaError>(m, "SchemaError", PyExc_ValueError);
    py::register_exception<NetworkError>(m, "NetworkError", PyExc_ConnectionError);

    // telemetry
    py::class_<RttStats>(m, "RttStats")
        .def_readonly("mean_s", &RttStats::mean_s)
        .def_readonly("max_s", &RttStats::max_s)
        .def_readonly("std_s", &RttStats::std_s)
        .def("__repr__", [](const RttStats& s) {
            return "RttStats(mean_s=" + std::to_string(s.mean_s) +
                   ", max_s=" + std::to_string(s.max_s) + ", std_s=" + std::to_string(s.std_s) +
                   ")";
        });
    m.def("rtt_stats", [](const std::vector<double>& rtts) { return rtt_stats(rtts); },
          py::arg("rtts_s"));

    py::class_<NodeTelemetry>(m, "NodeTelemetry")
        .def(py::init<>())
        .def_readwrite("rtt_to_peers_s", &NodeTelemetry::rtt_to_peers_s)
        .def_readwrite("tx_bps", &NodeTelemetry::tx_bps)
        .def_readwrite("rx_bps", &NodeTelemetry::rx_bps)
        .def_readwrite("cpu_load1", &NodeTelemetry::cpu_load1)
        .def_readwrite("mem_available_bytes", &NodeTelemetry::mem_available_bytes);

    py::class_<ClusterSnapshot>(m, "ClusterSnapshot")
        .def(py::init<>())
        .def_readwrite("timestamp_s", &ClusterSnapshot::timestamp_s)
        .def_readwrite("nodes", &ClusterSnapshot::nodes)
        .def("node_ids", &ClusterSnapshot::node_ids)
        .def("to_json", [](const ClusterSnapshot& s) { return snapshot_to_json(s).dump(2); })
        .def_static("from_json", [](const std::string& text) {
            return snapshot_from_json(nlohmann::json::parse(text));
        });
    m.def("validate_snapshot", [](const ClusterSnapshot& s) { validate(s); });
    m.def("load_snapshot", &load_snapshot, py::arg("path"));
    m.def("save_snapshot", &save_snapshot, py::arg("snapshot"), py::arg("path"));

    py::class_<MetricQueryConfig>(m, "MetricQueryConfig")
        .def(py::init<>())
        .def_readwrite("cpu_query", &MetricQueryConfig::cpu_query)
        .def_readwrite("mem_query", &MetricQueryConfig::mem_query)
        .def_readwrite("tx_query", &MetricQueryConfig::tx_query)
        .def_readwrite("rx_query", &MetricQueryConfig::rx_query)
        .def_readwrite("rtt_query", &MetricQueryConfig::rtt_query)
        .def_readwrite("node_label", &MetricQueryConfig::node_label)
        .def_readwrite("rtt_source_label", &MetricQueryConfig::rtt_source_label)
        .def_readwrite("rtt_target_label", &MetricQueryConfig::rtt_target_label)
        .def_readwrite("timeout_s", &MetricQueryConfig::timeout_s);
    m.def("fetch_snapshot", &fetch_snapshot, py::arg("base_url"),
          py::arg("config") = MetricQueryConfig{},
          py::call_guard<py::gil_scoped_release>());

    // features
    py::enum_<AppType>(m, "AppType")
        .value("Sort", AppType::Sort)
        .value("PageRank", AppType::PageRank)
        .value("Join", AppType::Join);
    m.def("app_type_from_string", &app_type_from_string, py::arg("name"));

    py::class_<JobSpec>(m, "JobSpec")
        .def(py::init([](AppType app, std::int64_t input_size, int executor_count,
                         int executor_memory_mb) {
                 JobSpec job{app, input_size, executor_count, executor_memory_mb};
                 validate(job);
                 return job;
             }),
             py::arg("app"), py::arg("input_size"), py::arg("executor_count") = 1,
             py::arg("executor_memory_mb") = 512)
        .def_readwrite("app", &JobSpec::app)
        .def_readwrite("input_size", &JobSpec::input_size)
        .def_readwrite("executor_count", &JobSpec::executor_count)
        .def_readwrite("executor_memory_mb", &JobSpec::executor_memory_mb);

    m.def("feature_names", [] { return feature_names(); });
    m.def("encode_app_type", &encode_app_type, py::arg("app"));
    m.def("build_features",
          [](const NodeId& node, const ClusterSnapshot& snap, const JobSpec& job) {
              const FeatureVector fv = build_features(node, snap, job);
              return std::vector<double>(fv.begin(), fv.end());
          },
          py::arg("node"), py::arg("snapshot"), py::arg("job"));

    // models
    py::class_<LinearConfig>(m, "LinearConfig")
        .def(py::init<>())
        .def_readwrite("ridge_lambda", &LinearConfig::ridge_lambda);
    py::class_<ForestConfig>(m, "ForestConfig")
        .def(py::init<>())
        .def_readwrite("n_trees", &ForestConfig::n_trees)
        .def_readwrite("max_depth", &ForestConfig::max_depth)
        .def_readwrite("min_samples_leaf", &ForestConfig::min_samples_leaf)
        .def_readwrite("feature_subsample", &ForestConfig::feature_subsample)
        .def_readwrite("bootstrap", &ForestConfig::bootstrap);
    py::class_<GbdtConfig>(m, "GbdtConfig")
        .def(py::init<>())
        .def_readwrite("n_rounds", &GbdtConfig::n_rounds)
        .def_readwrite("learning_rate", &GbdtConfig::learning_rate)
        .def_readwrite("max_depth", &GbdtConfig::max_depth)
        .def_readwrite("min_samples_leaf", &GbdtConfig::min_samples_leaf);
    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("linear", &TrainConfig::linear)
        .def_readwrite("forest", &TrainConfig::forest)
        .def_readwrite("gbdt", &TrainConfig::gbdt);

    py::class_<Dataset>(m, "Dataset")
        .def(py::init([](const std::vector<std::vector<double>>& features,
                         const std::vector<double>& targets_s) {
                 Dataset data;
                 data.schema = feature_names();
                 for (const auto& row : features) {
                     if (row.size() != kFeatureCount)
                         throw SchemaError("feature rows must have 13 entries");
                     FeatureVector fv{};
                     std::copy(row.begin(), row.end(), fv.begin());
                     data.features.push_back(fv);
                 }
                 data.targets_s = targets_s;
                 validate(data);
                 return data;
             }),
             py::arg("features"), py::arg("targets_s"))
        .def_property_readonly("schema", [](const Dataset& d) { return d.schema; })
        .def("__len__", &Dataset::size);

    py::enum_<ModelKind>(m, "ModelKind")
        .value("Linear", ModelKind::Linear)
        .value("RandomForest", ModelKind::RandomForest)
        .value("GradientBoosted", ModelKind::GradientBoosted);

    py::class_<Metrics>(m, "Metrics")
        .def_readonly("mse", &Metrics::mse)
        .def_readonly("mae", &Metrics::mae)
        .def_readonly("r2", &Metrics::r2);

    py::class_<TrainedModel>(m, "TrainedModel")
        .def_readonly("kind", &TrainedModel::kind)
        .def_property_readonly("schema", [](const TrainedModel& m_) { return m_.schema; })
        .def("predict", [](const TrainedModel& model, const std::vector<double>& fv) {
            return model.predict(std::span<const double>(fv.data(), fv.size()));
        });

    m.def("train_linear", &train_linear, py::arg("data"), py::arg("config") = TrainConfig{});
    m.def("train_random_forest", &train_random_forest, py::arg("data"),
          py::arg("config") = TrainConfig{});
    m.def("train_gbdt", &train_gbdt, py::arg("data"), py::arg("config") = TrainConfig{});
    m.def("evaluate", &evaluate, py::arg("model"), py::arg("data"));
    m.def("feature_importance", &feature_importance, py::arg("model"));
    m.def("linear_weight_importance", &linear_weight_importance, py::arg("model"));
    m.def("save_model", &save_model, py::arg("model"), py::arg("path"));
    m.def("load_model", &load_model, py::arg("path"));

    // decision
    py::class_<RankedNode>(m, "RankedNode")
        .def_readonly("node", &RankedNode::node)
        .def_readonly("predicted_duration_s", &RankedNode::predicted_duration_s);
    py::class_<PlacementDecision>(m, "PlacementDecision")
        .def_readonly("job", &PlacementDecision::job)
        .def_readonly("ranking", &PlacementDecision::ranking)
        .def_readonly("chosen", &PlacementDecision::chosen)
        .def_readonly("snapshot_timestamp_s", &PlacementDecision::snapshot_timestamp_s)
        .def("to_json", [](const PlacementDecision& d) { return decision_to_json(d).dump(2); });

    py::class_<NodeCapacity>(m, "NodeCapacity")
        .def(py::init<>())
        .def_readwrite("cpu_total", &NodeCapacity::cpu_total)
        .def_readwrite("mem_total_bytes", &NodeCapacity::mem_total_bytes);

    m.def("rank_nodes", &rank_nodes, py::arg("model"), py::arg("snapshot"), py::arg("job"));
    m.def("baseline_default", &baseline_default, py::arg("snapshot"), py::arg("job"),
          py::arg("capacities"));
    m.def("topk_accuracy", &topk_accuracy, py::arg("decisions"), py::arg("true_fastest"),
          py::arg("k"));

    // simulator
    py::class_<Topology>(m, "Topology")
        .def(py::init<>())
        .def_static("three_site_default", &Topology::three_site_default)
        .def("node_ids", &Topology::node_ids)
        .def("site_of", &Topology::site_of, py::arg("node"))
        .def("base_rtt_s", &Topology::base_rtt_s, py::arg("a"), py::arg("b"))
        .def_readwrite("capacities", &Topology::capacities);

    py::class_<AppParams>(m, "AppParams")
        .def_readwrite("base_seconds", &AppParams::base_seconds)
        .def_readwrite("bytes_per_record", &AppParams::bytes_per_record);
    py::class_<OracleParams>(m, "OracleParams")
        .def(py::init<>())
        .def_readwrite("executor_alpha", &OracleParams::executor_alpha)
        .def_readwrite("beta_net", &OracleParams::beta_net)
        .def_readwrite("beta_cpu", &OracleParams::beta_cpu)
        .def_readwrite("beta_rtt", &OracleParams::beta_rtt)
        .def_readwrite("rtt_ref_s", &OracleParams::rtt_ref_s)
        .def_readwrite("bw_cap_bps", &OracleParams::bw_cap_bps)
        .def_readwrite("noise_sigma", &OracleParams::noise_sigma)
        .def_readwrite("bg_net_mean_bps", &OracleParams::bg_net_mean_bps)
        .def_readwrite("bg_cpu_min", &OracleParams::bg_cpu_min)
        .def_readwrite("bg_cpu_max", &OracleParams::bg_cpu_max)
        .def_readwrite("idle_net_bps", &OracleParams::idle_net_bps)
        .def_readwrite("idle_cpu_load", &OracleParams::idle_cpu_load)
        .def_readwrite("rtt_load_gamma", &OracleParams::rtt_load_gamma)
        .def_readwrite("join_skew_factor", &OracleParams::join_skew_factor)
        .def("app", py::overload_cast<AppType>(&OracleParams::app),
             py::return_value_policy::reference_internal);

    py::class_<NodeState>(m, "NodeState")
        .def_readonly("bg_cpu_load", &NodeState::bg_cpu_load)
        .def_readonly("bg_net_bps", &NodeState::bg_net_bps)
        .def_readonly("mem_used_bytes", &NodeState::mem_used_bytes);

    py::class_<SimulatedRun>(m, "SimulatedRun")
        .def_readonly("job", &SimulatedRun::job)
        .def_readonly("node", &SimulatedRun::node)
        .def_readonly("snapshot_before", &SimulatedRun::snapshot_before)
        .def_readonly("duration_s", &SimulatedRun::duration_s);

    py::class_<SimCluster>(m, "SimCluster")
        .def(py::init<Topology, OracleParams, std::uint64_t>(), py::arg("topology"),
             py::arg("params"), py::arg("seed"))
        .def(py::init([](std::uint64_t seed) {
                 return SimCluster(Topology::three_site_default(), OracleParams{}, seed);
             }),
             py::arg("seed"))
        .def("node_ids", &SimCluster::node_ids)
        .def("state", &SimCluster::state, py::arg("node"),
             py::return_value_policy::reference_internal)
        .def("join_skew_node", &SimCluster::join_skew_node)
        .def("now_s", &SimCluster::now_s)
        .def("apply_background_load", &SimCluster::apply_background_load, py::arg("intensity"))
        .def("sample_snapshot", &SimCluster::sample_snapshot)
        .def("loaded_rtt_s", &SimCluster::loaded_rtt_s, py::arg("a"), py::arg("b"))
        .def("oracle_duration", &SimCluster::oracle_duration, py::arg("job"), py::arg("node"),
             py::arg("noiseless") = true)
        .def("run_job", &SimCluster::run_job, py::arg("job"), py::arg("node"))
        .def("counterfactual_durations", &SimCluster::counterfactual_durations, py::arg("job"));

    py::class_<SimConfig>(m, "SimConfig")
        .def(py::init<>())
        .def_readwrite("topology", &SimConfig::topology)
        .def_readwrite("oracle", &SimConfig::oracle)
        .def("to_json", [](const SimConfig& c) { return sim_config_to_json(c).dump(2); })
        .def_static("from_json",
                    [](const std::string& text) {
                        return sim_config_from_json(nlohmann::json::parse(text));
                    })
        .def_static("load", &load_sim_config, py::arg("path"));

    // harness
    py::class_<WorkloadMatrix>(m, "WorkloadMatrix")
        .def_readwrite("configs", &WorkloadMatrix::configs)
        .def_readwrite("target_nodes", &WorkloadMatrix::target_nodes)
        .def_readwrite("repeats", &WorkloadMatrix::repeats)
        .def("total_runs", &WorkloadMatrix::total_runs);
    m.def("generate_matrix", &generate_matrix, py::arg("nodes"));

    py::class_<CollectedRow>(m, "CollectedRow")
        .def_readonly("run_id", &CollectedRow::run_id)
        .def_readonly("timestamp_s", &CollectedRow::timestamp_s)
        .def_readonly("node", &CollectedRow::node)
        .def_readonly("job", &CollectedRow::job)
        .def_readonly("duration_s", &CollectedRow::duration_s)
        .def_property_readonly("features", [](const CollectedRow& r) {
            return std::vector<double>(r.features.begin(), r.features.end());
        });
    m.def("collect_dataset", &collect_dataset, py::arg("cluster"), py::arg("matrix"),
          py::arg("bg_intensity"), py::call_guard<py::gil_scoped_release>());
    m.def("write_dataset_csv", &write_dataset_csv, py::arg("rows"), py::arg("path"));
    m.def("read_dataset_csv", &read_dataset_csv, py::arg("path"));
    m.def("to_dataset", &to_dataset, py::arg("rows"));

    py::class_<ModelReport>(m, "ModelReport")
        .def_readonly("name", &ModelReport::name)
        .def_readonly("held_out", &ModelReport::held_out);
    py::class_<TrainAllResult>(m, "TrainAllResult")
        .def_readonly("linear", &TrainAllResult::linear)
        .def_readonly("forest", &TrainAllResult::forest)
        .def_readonly("gbdt", &TrainAllResult::gbdt)
        .def_readonly("reports", &TrainAllResult::reports)
        .def_readonly("train_rows", &TrainAllResult::train_rows)
        .def_readonly("test_rows", &TrainAllResult::test_rows);
    m.def("train_all", &train_all, py::arg("rows"), py::arg("split_seed"),
          py::arg("config") = TrainConfig{}, py::call_guard<py::gil_scoped_release>());

    py::class_<NamedMethod>(m, "NamedMethod")
        .def(py::init([](std::string name,
                         std::function<PlacementDecision(const ClusterSnapshot&, const JobSpec&)>
                             place) {
                 return NamedMethod{std::move(name), std::move(place)};
             }),
             py::arg("name"), py::arg("place"))
        .def_readonly("name", &NamedMethod::name);
    m.def("make_baseline_method", &make_baseline_method, py::arg("name"), py::arg("topology"));
    m.def(
        "make_model_method",
        [](std::string name, TrainedModel model) {
            // Copy the model into the closure so python-held methods own it.
            auto shared = std::make_shared<TrainedModel>(std::move(model));
            return NamedMethod{std::move(name),
                               [shared](const ClusterSnapshot& snap, const JobSpec& job) {
                                   return rank_nodes(*shared, snap, job);
                               }};
        },
        py::arg("name"), py::arg("model"));

    py::class_<MethodScore>(m, "MethodScore")
        .def_readonly("name", &MethodScore::name)
        .def_readonly("top1", &MethodScore::top1)
        .def_readonly("top2", &MethodScore::top2);
    py::class_<ResultsTable>(m, "ResultsTable")
        .def_readonly("methods", &ResultsTable::methods)
        .def_readonly("model_reports", &ResultsTable::model_reports);
    m.def("evaluate_schedulers", &evaluate_schedulers, py::arg("cluster"), py::arg("matrix"),
          py::arg("methods"), py::arg("n_trials"), py::arg("bg_intensity"));
    m.def("emit_results", &emit_results, py::arg("table"), py::arg("out_dir"));

    m.attr("FEATURE_COUNT") = static_cast<int>(kFeatureCount);
    m.attr("__version__") = "0.1.0";
}
