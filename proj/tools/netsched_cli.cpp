// netsched: collect simulated training data, train the duration models,
// evaluate placement accuracy, and schedule one job against a telemetry
// snapshot or a live Prometheus-compatible endpoint.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "netsched/harness.hpp"
#include "netsched/prometheus.hpp"
#include "netsched/simulator.hpp"

namespace fs = std::filesystem;
using namespace netsched;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

SimConfig resolve_sim_config(const std::string& topology_path) {
    if (topology_path.empty()) return SimConfig{};
    return load_sim_config(topology_path);
}

struct CommonOpts {
    std::uint64_t seed = 42;
    std::string topology_path;
    double bg_intensity = 1.0 / 3.0;
};

int cmd_collect(const CommonOpts& common, const std::string& out_dir) {
    const SimConfig config = resolve_sim_config(common.topology_path);
    SimCluster cluster(config.topology, config.oracle, common.seed);
    const WorkloadMatrix matrix = generate_matrix(cluster.node_ids());
    const auto rows = collect_dataset(cluster, matrix, common.bg_intensity);
    fs::create_directories(out_dir);
    const fs::path csv_path = fs::path(out_dir) / "dataset.csv";
    write_dataset_csv(rows, csv_path);
    std::cerr << "wrote " << rows.size() << " rows to " << csv_path.string() << "\n";
    return 0;
}

int cmd_train(const CommonOpts& common, const std::string& data_path,
              const std::string& out_dir) {
    const auto rows = read_dataset_csv(data_path);
    TrainConfig cfg;
    cfg.seed = common.seed;
    const TrainAllResult result = train_all(rows, common.seed, cfg);
    fs::create_directories(out_dir);
    save_model(result.linear, fs::path(out_dir) / "linear.model");
    save_model(result.forest, fs::path(out_dir) / "forest.model");
    save_model(result.gbdt, fs::path(out_dir) / "gbdt.model");
    ResultsTable table;
    table.model_reports = result.reports;
    emit_results(table, out_dir); // metrics only; no placement scores yet
    std::cerr << "trained on " << result.train_rows << " rows, held out " << result.test_rows
              << "; models written to " << out_dir << "\n";
    for (const ModelReport& r : result.reports)
        std::cerr << "  " << r.name << ": mse " << r.held_out.mse << ", mae " << r.held_out.mae
                  << ", r2 " << r.held_out.r2 << "\n";
    return 0;
}

int cmd_evaluate(const CommonOpts& common, const std::string& models_dir, int trials,
                 const std::string& out_dir) {
    const SimConfig config = resolve_sim_config(common.topology_path);
    const TrainedModel linear = load_model(fs::path(models_dir) / "linear.model");
    const TrainedModel forest = load_model(fs::path(models_dir) / "forest.model");
    const TrainedModel gbdt = load_model(fs::path(models_dir) / "gbdt.model");

    SimCluster cluster(config.topology, config.oracle, common.seed);
    const WorkloadMatrix matrix = generate_matrix(cluster.node_ids());
    const std::vector<NamedMethod> methods = {
        make_baseline_method("default", config.topology),
        make_model_method("linear", linear),
        make_model_method("gbdt", gbdt),
        make_model_method("forest", forest),
    };
    const ResultsTable table =
        evaluate_schedulers(cluster, matrix, methods, trials, common.bg_intensity);

    std::printf("%-10s %8s %8s\n", "method", "top1", "top2");
    for (const MethodScore& m : table.methods)
        std::printf("%-10s %8.3f %8.3f\n", m.name.c_str(), m.top1, m.top2);

    if (!out_dir.empty()) {
        emit_results(table, out_dir);
        std::cerr << "wrote " << (fs::path(out_dir) / "results.csv").string() << "\n";
    }
    return 0;
}

int cmd_schedule(const std::string& model_path, const std::string& snapshot_path,
                 const std::string& endpoint, const std::string& query_config_path,
                 const JobSpec& job) {
    const TrainedModel model = load_model(model_path);
    ClusterSnapshot snapshot;
    if (!snapshot_path.empty()) {
        snapshot = load_snapshot(snapshot_path);
    } else {
        MetricQueryConfig qcfg;
        if (!query_config_path.empty()) qcfg = load_query_config(query_config_path);
        snapshot = fetch_snapshot(endpoint, qcfg);
    }
    const PlacementDecision decision = rank_nodes(model, snapshot, job);
    std::cout << decision_to_json(decision).dump(2) << "\n";
    return 0;
}

int cmd_topology(const std::string& topology_path) {
    const SimConfig config = resolve_sim_config(topology_path);
    std::cout << sim_config_to_json(config).dump(2) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"telemetry-aware job placement: simulate, train, evaluate, schedule"};
    app.require_subcommand(1);

    CommonOpts common;

    auto* collect = app.add_subcommand("collect", "run the workload matrix and write dataset.csv");
    std::string collect_out = "data";
    collect->add_option("--seed", common.seed, "master seed")->capture_default_str();
    collect->add_option("--topology", common.topology_path, "topology/oracle config file");
    collect->add_option("--bg-intensity", common.bg_intensity,
                        "fraction of nodes under background load")
        ->capture_default_str();
    collect->add_option("--out", collect_out, "output directory")->capture_default_str();

    auto* train = app.add_subcommand("train", "train linear/forest/gbdt models from a dataset");
    std::string train_data = "data/dataset.csv";
    std::string train_out = "models";
    train->add_option("--seed", common.seed, "training + split seed")->capture_default_str();
    train->add_option("--data", train_data, "dataset csv path")->capture_default_str();
    train->add_option("--out", train_out, "model output directory")->capture_default_str();

    auto* evaluate = app.add_subcommand("evaluate", "score placement accuracy against the baseline");
    std::string eval_models = "models";
    std::string eval_out = "results";
    int eval_trials = 200;
    evaluate->add_option("--seed", common.seed, "evaluation seed")->capture_default_str();
    evaluate->add_option("--models", eval_models, "directory with *.model files")
        ->capture_default_str();
    evaluate->add_option("--trials", eval_trials, "number of evaluation trials")
        ->capture_default_str();
    evaluate->add_option("--topology", common.topology_path, "topology/oracle config file");
    evaluate->add_option("--bg-intensity", common.bg_intensity,
                         "fraction of nodes under background load")
        ->capture_default_str();
    evaluate->add_option("--out", eval_out, "results output directory")->capture_default_str();

    auto* schedule = app.add_subcommand("schedule", "rank nodes for one job and print the decision");
    std::string sched_model;
    std::string sched_snapshot;
    std::string sched_endpoint;
    std::string sched_query_config;
    std::string sched_app = "sort";
    JobSpec job;
    schedule->add_option("--model", sched_model, "trained model file")->required();
    auto* snap_opt = schedule->add_option("--snapshot", sched_snapshot, "telemetry snapshot file");
    auto* endpoint_opt =
        schedule->add_option("--endpoint", sched_endpoint, "Prometheus-compatible base URL");
    snap_opt->excludes(endpoint_opt);
    schedule->add_option("--query-config", sched_query_config, "metric query config file");
    schedule->add_option("--app", sched_app, "application type: sort|pagerank|join")
        ->capture_default_str();
    schedule->add_option("--input-size", job.input_size, "input records")->capture_default_str();
    schedule->add_option("--executors", job.executor_count, "executor count")
        ->capture_default_str();
    schedule->add_option("--executor-memory", job.executor_memory_mb, "executor memory (MB)")
        ->capture_default_str();

    auto* topology = app.add_subcommand("topology", "inspect the simulated cluster configuration");
    bool topo_dump = false;
    topology->add_flag("--dump", topo_dump, "print the full config with defaults");
    topology->add_option("--topology", common.topology_path, "topology/oracle config file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (collect->parsed()) return cmd_collect(common, collect_out);
        if (train->parsed()) return cmd_train(common, train_data, train_out);
        if (evaluate->parsed()) return cmd_evaluate(common, eval_models, eval_trials, eval_out);
        if (schedule->parsed()) {
            if (sched_snapshot.empty() && sched_endpoint.empty()) {
                std::cerr << "error: schedule needs --snapshot or --endpoint\n";
                return kExitUsage;
            }
            job.app = app_type_from_string(sched_app);
            validate(job);
            return cmd_schedule(sched_model, sched_snapshot, sched_endpoint,
                                sched_query_config, job);
        }
        if (topology->parsed()) {
            if (!topo_dump) {
                std::cerr << "error: topology currently only supports --dump\n";
                return kExitUsage;
            }
            return cmd_topology(common.topology_path);
        }
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const NetworkError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
