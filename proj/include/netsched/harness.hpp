#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "netsched/decision.hpp"
#include "netsched/models.hpp"
#include "netsched/simulator.hpp"

namespace netsched {

// The full experiment grid: 60 configurations (20 per application:
// 5 input sizes x 2 executor counts x 2 memory levels), run on every node,
// repeated 10 times -> 3600 samples.
struct WorkloadMatrix {
    std::vector<JobSpec> configs; // sorted, duplicate-free
    std::vector<NodeId> target_nodes;
    int repeats = 10;

    std::size_t total_runs() const {
        return configs.size() * target_nodes.size() * static_cast<std::size_t>(repeats);
    }
};

WorkloadMatrix generate_matrix(const std::vector<NodeId>& nodes);

// One logged training sample: telemetry of the target node immediately
// before launch, plus the job configuration and the measured duration.
struct CollectedRow {
    int run_id = 0;
    double timestamp_s = 0.0;
    NodeId node;
    JobSpec job;
    FeatureVector features{};
    double duration_s = 0.0;
};

// Runs the whole matrix on the cluster: per (config, node, repeat) tuple the
// background load is re-randomized, telemetry is sampled, the job runs on
// the prescribed node and one row is appended.
std::vector<CollectedRow> collect_dataset(SimCluster& cluster, const WorkloadMatrix& matrix,
                                          double bg_intensity);

// CSV columns, in order:
//   run_id,timestamp,node,app_type,input_size,executor_count,
//   executor_memory_mb,rtt_mean_s,rtt_max_s,rtt_std_s,tx_bps,rx_bps,
//   cpu_load1,mem_available_bytes,duration_s
// Floats use shortest round-trip formatting, so equal data means equal bytes.
extern const std::string kDatasetCsvHeader;
void write_dataset_csv(const std::vector<CollectedRow>& rows,
                       const std::filesystem::path& path);
std::vector<CollectedRow> read_dataset_csv(const std::filesystem::path& path);

Dataset to_dataset(const std::vector<CollectedRow>& rows);

struct ModelReport {
    std::string name;
    Metrics held_out;
};

struct TrainAllResult {
    TrainedModel linear;
    TrainedModel forest;
    TrainedModel gbdt;
    std::vector<ModelReport> reports; // linear, forest, gbdt
    std::size_t train_rows = 0;
    std::size_t test_rows = 0;
};

// Group-aware 80/20 split (every repeat of one (config, node) pair stays on
// one side): group keys are sorted, shuffled with split_seed, and the first
// floor(20%) groups become the test set. Trains all three model kinds.
TrainAllResult train_all(const std::vector<CollectedRow>& rows, std::uint64_t split_seed,
                         const TrainConfig& cfg);

struct NamedMethod {
    std::string name;
    std::function<PlacementDecision(const ClusterSnapshot&, const JobSpec&)> place;
};

NamedMethod make_baseline_method(std::string name, const Topology& topology);
NamedMethod make_model_method(std::string name, const TrainedModel& model);

struct MethodScore {
    std::string name;
    double top1 = 0.0;
    double top2 = 0.0;
};

struct ResultsTable {
    std::vector<MethodScore> methods;
    std::vector<ModelReport> model_reports;
};

// Per trial: re-randomize background load, draw one config from the matrix
// (uniformly, via the cluster stream), sample one shared snapshot, compute
// the noiseless counterfactual truth, and ask every method for a decision on
// that same snapshot.
ResultsTable evaluate_schedulers(SimCluster& cluster, const WorkloadMatrix& matrix,
                                 const std::vector<NamedMethod>& methods, int n_trials,
                                 double bg_intensity);

// results.csv (method,top1,top2) and, when model reports are present,
// model_metrics.csv (model,mse,mae,r2).
void emit_results(const ResultsTable& table, const std::filesystem::path& out_dir);
ResultsTable read_results_csv(const std::filesystem::path& path);

} // namespace netsched
