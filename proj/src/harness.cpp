#include "netsched/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

namespace netsched {

namespace {

// Shortest round-trip decimal form; keeps CSV output byte-stable.
std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& field, const char* column) {
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
        throw ParseError("dataset csv: bad " + std::string(column) + " value '" + field + "'");
    return v;
}

std::int64_t parse_int(const std::string& field, const char* column) {
    std::int64_t v = 0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
        throw ParseError("dataset csv: bad " + std::string(column) + " value '" + field + "'");
    return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    fields.push_back(std::move(current));
    return fields;
}

} // namespace

WorkloadMatrix generate_matrix(const std::vector<NodeId>& nodes) {
    static const std::int64_t kInputSizes[] = {100000, 500000, 1000000, 5000000, 10000000};
    static const int kExecutorCounts[] = {1, 2};
    static const int kMemoryMb[] = {512, 1024};

    WorkloadMatrix matrix;
    for (AppType app : kAllAppTypes)
        for (std::int64_t input : kInputSizes)
            for (int execs : kExecutorCounts)
                for (int mem : kMemoryMb)
                    matrix.configs.push_back(JobSpec{app, input, execs, mem});
    std::sort(matrix.configs.begin(), matrix.configs.end());
    matrix.target_nodes = nodes;
    std::sort(matrix.target_nodes.begin(), matrix.target_nodes.end());
    matrix.repeats = 10;
    return matrix;
}

std::vector<CollectedRow> collect_dataset(SimCluster& cluster, const WorkloadMatrix& matrix,
                                          double bg_intensity) {
    std::vector<CollectedRow> rows;
    rows.reserve(matrix.total_runs());
    int run_id = 0;
    for (const JobSpec& job : matrix.configs) {
        for (const NodeId& node : matrix.target_nodes) {
            for (int repeat = 0; repeat < matrix.repeats; ++repeat) {
                cluster.apply_background_load(bg_intensity);
                const SimulatedRun run = cluster.run_job(job, node);
                CollectedRow row;
                row.run_id = run_id++;
                row.timestamp_s = run.snapshot_before.timestamp_s;
                row.node = node;
                row.job = job;
                row.features = build_features(node, run.snapshot_before, job);
                row.duration_s = run.duration_s;
                rows.push_back(std::move(row));
            }
        }
    }
    return rows;
}

const std::string kDatasetCsvHeader =
    "run_id,timestamp,node,app_type,input_size,executor_count,executor_memory_mb,"
    "rtt_mean_s,rtt_max_s,rtt_std_s,tx_bps,rx_bps,cpu_load1,mem_available_bytes,duration_s";

void write_dataset_csv(const std::vector<CollectedRow>& rows,
                       const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write dataset csv " + path.string());
    out << kDatasetCsvHeader << "\n";
    for (const CollectedRow& row : rows) {
        out << row.run_id << ',' << format_double(row.timestamp_s) << ',' << row.node << ','
            << to_string(row.job.app) << ',' << row.job.input_size << ','
            << row.job.executor_count << ',' << row.job.executor_memory_mb;
        for (std::size_t j = 0; j < 7; ++j) out << ',' << format_double(row.features[j]);
        out << ',' << format_double(row.duration_s) << "\n";
    }
    if (!out) throw Error("failed writing dataset csv " + path.string());
}

std::vector<CollectedRow> read_dataset_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open dataset csv " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ParseError("dataset csv " + path.string() + " is empty");
    if (line == kDatasetCsvHeader + "\r") line.pop_back();
    if (line != kDatasetCsvHeader)
        throw SchemaError("dataset csv " + path.string() + " has an unexpected header");

    std::vector<CollectedRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 15)
            throw ParseError("dataset csv line " + std::to_string(line_no) + ": expected 15 fields, got " +
                             std::to_string(fields.size()));
        CollectedRow row;
        row.run_id = static_cast<int>(parse_int(fields[0], "run_id"));
        row.timestamp_s = parse_double(fields[1], "timestamp");
        row.node = fields[2];
        row.job.app = app_type_from_string(fields[3]);
        row.job.input_size = parse_int(fields[4], "input_size");
        row.job.executor_count = static_cast<int>(parse_int(fields[5], "executor_count"));
        row.job.executor_memory_mb =
            static_cast<int>(parse_int(fields[6], "executor_memory_mb"));
        validate(row.job);

        const char* names[7] = {"rtt_mean_s", "rtt_max_s",  "rtt_std_s",          "tx_bps",
                                "rx_bps",     "cpu_load1",  "mem_available_bytes"};
        for (std::size_t j = 0; j < 7; ++j)
            row.features[j] = parse_double(fields[7 + j], names[j]);
        const auto onehot = encode_app_type(row.job.app);
        row.features[7] = onehot[0];
        row.features[8] = onehot[1];
        row.features[9] = onehot[2];
        row.features[10] = static_cast<double>(row.job.input_size);
        row.features[11] = static_cast<double>(row.job.executor_count);
        row.features[12] = static_cast<double>(row.job.executor_memory_mb);
        row.duration_s = parse_double(fields[14], "duration_s");
        if (!std::isfinite(row.duration_s) || row.duration_s <= 0.0)
            throw ValidationError("dataset csv line " + std::to_string(line_no) +
                                  ": duration must be positive");
        rows.push_back(std::move(row));
    }
    return rows;
}

Dataset to_dataset(const std::vector<CollectedRow>& rows) {
    Dataset data;
    data.schema = feature_names();
    data.features.reserve(rows.size());
    data.targets_s.reserve(rows.size());
    for (const CollectedRow& row : rows) {
        data.features.push_back(row.features);
        data.targets_s.push_back(row.duration_s);
    }
    return data;
}

TrainAllResult train_all(const std::vector<CollectedRow>& rows, std::uint64_t split_seed,
                         const TrainConfig& cfg) {
    if (rows.size() < 100)
        throw ValidationError("train_all needs at least 100 rows, got " +
                              std::to_string(rows.size()));

    // Group rows by (config, node) so no group straddles the split.
    using GroupKey = std::tuple<AppType, std::int64_t, int, int, NodeId>;
    std::map<GroupKey, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const CollectedRow& r = rows[i];
        groups[{r.job.app, r.job.input_size, r.job.executor_count, r.job.executor_memory_mb,
                r.node}]
            .push_back(i);
    }
    std::vector<const std::vector<std::size_t>*> group_rows;
    group_rows.reserve(groups.size());
    for (const auto& [key, idx] : groups) group_rows.push_back(&idx);

    RandomStream stream(split_seed);
    std::vector<std::size_t> order =
        stream.sample_without_replacement(group_rows.size(), group_rows.size());
    const std::size_t n_test_groups = std::max<std::size_t>(1, group_rows.size() / 5);

    std::vector<CollectedRow> train_rows;
    std::vector<CollectedRow> test_rows;
    for (std::size_t g = 0; g < order.size(); ++g) {
        auto& dst = g < n_test_groups ? test_rows : train_rows;
        for (std::size_t i : *group_rows[order[g]]) dst.push_back(rows[i]);
    }

    const Dataset train = to_dataset(train_rows);
    const Dataset test = to_dataset(test_rows);

    TrainAllResult result;
    result.train_rows = train.size();
    result.test_rows = test.size();
    result.linear = train_linear(train, cfg);
    result.forest = train_random_forest(train, cfg);
    result.gbdt = train_gbdt(train, cfg);
    result.reports = {{"linear", evaluate(result.linear, test)},
                      {"forest", evaluate(result.forest, test)},
                      {"gbdt", evaluate(result.gbdt, test)}};
    return result;
}

NamedMethod make_baseline_method(std::string name, const Topology& topology) {
    std::map<NodeId, NodeCapacity> capacities;
    for (const NodeId& node : topology.node_ids()) capacities[node] = topology.capacity(node);
    return NamedMethod{std::move(name),
                       [capacities](const ClusterSnapshot& snap, const JobSpec& job) {
                           return baseline_default(snap, job, capacities);
                       }};
}

NamedMethod make_model_method(std::string name, const TrainedModel& model) {
    return NamedMethod{std::move(name), [&model](const ClusterSnapshot& snap, const JobSpec& job) {
                           return rank_nodes(model, snap, job);
                       }};
}

ResultsTable evaluate_schedulers(SimCluster& cluster, const WorkloadMatrix& matrix,
                                 const std::vector<NamedMethod>& methods, int n_trials,
                                 double bg_intensity) {
    if (n_trials < 1) throw ValidationError("n_trials must be >= 1");
    if (matrix.configs.empty()) throw ValidationError("workload matrix is empty");
    if (methods.empty()) throw ValidationError("no methods to evaluate");

    std::vector<std::vector<PlacementDecision>> decisions(methods.size());
    std::vector<NodeId> truths;
    truths.reserve(static_cast<std::size_t>(n_trials));

    for (int trial = 0; trial < n_trials; ++trial) {
        cluster.apply_background_load(bg_intensity);
        const JobSpec job = matrix.configs[cluster.rng().uniform_index(matrix.configs.size())];
        const ClusterSnapshot snap = cluster.sample_snapshot();

        const auto counterfactual = cluster.counterfactual_durations(job);
        NodeId truth;
        double best = std::numeric_limits<double>::infinity();
        for (const auto& [node, duration] : counterfactual) {
            if (duration < best) { // map order = lexicographic tie-break
                best = duration;
                truth = node;
            }
        }
        truths.push_back(truth);

        for (std::size_t m = 0; m < methods.size(); ++m)
            decisions[m].push_back(methods[m].place(snap, job));
    }

    ResultsTable table;
    for (std::size_t m = 0; m < methods.size(); ++m) {
        MethodScore score;
        score.name = methods[m].name;
        score.top1 = topk_accuracy(decisions[m], truths, 1);
        score.top2 = topk_accuracy(decisions[m], truths, 2);
        table.methods.push_back(std::move(score));
    }
    return table;
}

void emit_results(const ResultsTable& table, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    if (!table.methods.empty()) {
        std::ofstream out(out_dir / "results.csv");
        if (!out) throw Error("cannot write results.csv under " + out_dir.string());
        out << "method,top1,top2\n";
        for (const MethodScore& m : table.methods)
            out << m.name << ',' << format_double(m.top1) << ',' << format_double(m.top2)
                << "\n";
    }
    if (!table.model_reports.empty()) {
        std::ofstream out(out_dir / "model_metrics.csv");
        if (!out) throw Error("cannot write model_metrics.csv under " + out_dir.string());
        out << "model,mse,mae,r2\n";
        for (const ModelReport& r : table.model_reports)
            out << r.name << ',' << format_double(r.held_out.mse) << ','
                << format_double(r.held_out.mae) << ',' << format_double(r.held_out.r2) << "\n";
    }
}

ResultsTable read_results_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open results csv " + path.string());
    std::string line;
    if (!std::getline(in, line) || (line != "method,top1,top2" && line != "method,top1,top2\r"))
        throw SchemaError("results csv " + path.string() + " has an unexpected header");
    ResultsTable table;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 3)
            throw ParseError("results csv: expected 3 fields per row");
        table.methods.push_back(MethodScore{fields[0], parse_double(fields[1], "top1"),
                                            parse_double(fields[2], "top2")});
    }
    return table;
}

} // namespace netsched
