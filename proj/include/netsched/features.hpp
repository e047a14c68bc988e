#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "netsched/telemetry.hpp"

namespace netsched {

enum class AppType { Sort = 0, PageRank = 1, Join = 2 };

inline constexpr std::array<AppType, 3> kAllAppTypes = {AppType::Sort, AppType::PageRank,
                                                        AppType::Join};

std::string_view to_string(AppType app);              // "sort" / "pagerank" / "join"
AppType app_type_from_string(std::string_view name);  // throws ParseError

// The schedulable unit: what the client submits.
struct JobSpec {
    AppType app = AppType::Sort;
    std::int64_t input_size = 1; // records
    int executor_count = 1;
    int executor_memory_mb = 512;

    auto operator<=>(const JobSpec&) const = default;
};

void validate(const JobSpec& job); // throws ValidationError

// Fixed 13-slot encoding consumed by all models. Order is frozen; see
// feature_names() for the canonical slot list.
inline constexpr std::size_t kFeatureCount = 13;
using FeatureVector = std::array<double, kFeatureCount>;

// Canonical slot names, in order:
//   rtt_mean_s, rtt_max_s, rtt_std_s, tx_bps, rx_bps, cpu_load1,
//   mem_available_bytes, app_is_sort, app_is_pagerank, app_is_join,
//   input_size, executor_count, executor_memory_mb
// Dataset and model files embed this list for schema checking.
const std::vector<std::string>& feature_names();

std::array<double, 3> encode_app_type(AppType app);

// (node telemetry x job spec) -> feature vector. Pure; throws
// ValidationError when the node is absent from the snapshot.
FeatureVector build_features(const NodeId& node, const ClusterSnapshot& snapshot,
                             const JobSpec& job);

} // namespace netsched
