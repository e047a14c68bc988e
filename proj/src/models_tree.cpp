#include "netsched/models.hpp"

#include <algorithm>
#include <cmath>

namespace netsched {

double RegressionTree::predict(std::span<const double> fv) const {
    if (nodes.empty()) throw Error("empty tree");
    std::size_t i = 0;
    while (!nodes[i].is_leaf()) {
        const TreeNode& nd = nodes[i];
        i = fv[static_cast<std::size_t>(nd.feature)] < nd.threshold
                ? static_cast<std::size_t>(nd.left)
                : static_cast<std::size_t>(nd.right);
    }
    return nodes[i].value;
}

namespace {

struct SplitCandidate {
    int feature;
    double threshold;
    double approx_gain;
};

struct TreeBuilder {
    const std::vector<FeatureVector>& X;
    std::span<const double> y;
    const TreeFitOptions& opts;
    std::vector<int> allowed; // sorted ascending
    std::vector<TreeNode> nodes;

    // Two-pass SSE over the rows, in row order. Matching this arithmetic is
    // what makes the brute-force oracle comparison exact.
    double exact_sse(const std::vector<std::size_t>& rows) const {
        double mean = 0.0;
        for (std::size_t r : rows) mean += y[r];
        mean /= static_cast<double>(rows.size());
        double sse = 0.0;
        for (std::size_t r : rows) sse += (y[r] - mean) * (y[r] - mean);
        return sse;
    }

    int build(std::vector<std::size_t>& rows, int depth) {
        const std::size_t n = rows.size();
        double sum = 0.0;
        for (std::size_t r : rows) sum += y[r];
        const double mean = sum / static_cast<double>(n);
        const double sse_total = exact_sse(rows);

        const int idx = static_cast<int>(nodes.size());
        if (depth >= opts.max_depth || n < 2 * static_cast<std::size_t>(opts.min_samples_leaf) ||
            sse_total <= 0.0) {
            nodes.push_back(TreeNode{.value = mean});
            return idx;
        }

        // Candidate features for this split.
        std::vector<int> cands;
        if (opts.features_per_split > 0 &&
            static_cast<std::size_t>(opts.features_per_split) < allowed.size()) {
            const auto picked = opts.rng->sample_without_replacement(
                allowed.size(), static_cast<std::size_t>(opts.features_per_split));
            cands.reserve(picked.size());
            for (std::size_t p : picked) cands.push_back(allowed[p]);
            std::sort(cands.begin(), cands.end()); // keep lowest-index tie-break
        } else {
            cands = allowed;
        }

        // Pass 1: prefix-sum screening of every admissible (feature,
        // threshold) candidate, in (feature asc, threshold asc) order.
        // Pass 2: re-score near-ties exactly so the winner follows the
        // documented tie-break (lowest feature index, then lowest threshold)
        // independent of prefix-sum rounding.
        double sumsq = 0.0;
        for (std::size_t r : rows) sumsq += y[r] * y[r];
        int best_f = -1;
        double best_t = 0.0;
        double best_gain = 0.0;
        std::vector<SplitCandidate> candidates;
        std::vector<std::size_t> order = rows;
        std::vector<std::size_t> left_rows;
        std::vector<std::size_t> right_rows;
        const auto search = [&](const std::vector<int>& features) {
            candidates.clear();
            double max_approx = -std::numeric_limits<double>::infinity();
            for (int f : features) {
                const auto fi = static_cast<std::size_t>(f);
                std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                    return X[a][fi] < X[b][fi];
                });
                double lsum = 0.0;
                double lsq = 0.0;
                for (std::size_t i = 1; i < n; ++i) {
                    const double yv = y[order[i - 1]];
                    lsum += yv;
                    lsq += yv * yv;
                    const double prev = X[order[i - 1]][fi];
                    const double next = X[order[i]][fi];
                    if (!(prev < next)) continue; // need consecutive distinct values
                    if (i < static_cast<std::size_t>(opts.min_samples_leaf) ||
                        n - i < static_cast<std::size_t>(opts.min_samples_leaf))
                        continue;
                    const double li = static_cast<double>(i);
                    const double ri = static_cast<double>(n - i);
                    const double rsum = sum - lsum;
                    const double rsq = sumsq - lsq;
                    const double gain =
                        sse_total - (lsq - lsum * lsum / li) - (rsq - rsum * rsum / ri);
                    candidates.push_back(SplitCandidate{f, 0.5 * (prev + next), gain});
                    max_approx = std::max(max_approx, gain);
                }
            }
            const double window = max_approx - 1e-6 * std::max(sse_total, 1e-300);
            for (const SplitCandidate& cand : candidates) {
                if (cand.approx_gain < window) continue;
                left_rows.clear();
                right_rows.clear();
                const auto fi = static_cast<std::size_t>(cand.feature);
                for (std::size_t r : rows)
                    (X[r][fi] < cand.threshold ? left_rows : right_rows).push_back(r);
                const double gain = sse_total - exact_sse(left_rows) - exact_sse(right_rows);
                if (gain > best_gain) {
                    best_gain = gain;
                    best_f = cand.feature;
                    best_t = cand.threshold;
                }
            }
        };

        search(cands);
        // A sampled subset may be entirely uninformative here; fall back to
        // the full allowed set rather than wasting the node.
        if (best_f < 0 && cands.size() < allowed.size()) search(allowed);

        if (best_f < 0) { // no admissible split improves SSE
            nodes.push_back(TreeNode{.value = mean});
            return idx;
        }

        left_rows.clear();
        right_rows.clear();
        for (std::size_t r : rows) {
            if (X[r][static_cast<std::size_t>(best_f)] < best_t)
                left_rows.push_back(r);
            else
                right_rows.push_back(r);
        }

        nodes.push_back(TreeNode{.feature = best_f, .threshold = best_t, .gain = best_gain});
        const int left = build(left_rows, depth + 1);
        const int right = build(right_rows, depth + 1);
        nodes[static_cast<std::size_t>(idx)].left = left;
        nodes[static_cast<std::size_t>(idx)].right = right;
        return idx;
    }
};

} // namespace

RegressionTree fit_tree(const std::vector<FeatureVector>& features,
                        std::span<const double> targets_s,
                        const std::vector<std::size_t>& row_indices,
                        const TreeFitOptions& opts) {
    if (row_indices.empty()) throw ValidationError("fit_tree: no rows");
    if (opts.max_depth < 0) throw ValidationError("fit_tree: max_depth must be >= 0");
    if (opts.min_samples_leaf < 1)
        throw ValidationError("fit_tree: min_samples_leaf must be >= 1");
    if (opts.features_per_split > 0 && opts.rng == nullptr)
        throw ValidationError("fit_tree: per-split feature sampling needs an rng");

    TreeBuilder builder{features, targets_s, opts, {}, {}};
    if (opts.allowed_features.empty()) {
        builder.allowed.resize(kFeatureCount);
        for (std::size_t i = 0; i < kFeatureCount; ++i) builder.allowed[i] = static_cast<int>(i);
    } else {
        builder.allowed = opts.allowed_features;
        std::sort(builder.allowed.begin(), builder.allowed.end());
        for (int f : builder.allowed)
            if (f < 0 || f >= static_cast<int>(kFeatureCount))
                throw ValidationError("fit_tree: feature index out of range");
    }

    std::vector<std::size_t> rows = row_indices;
    RegressionTree tree;
    builder.build(rows, 0);
    tree.nodes = std::move(builder.nodes);
    return tree;
}

RegressionTree fit_tree(const Dataset& data, const TreeFitOptions& opts) {
    std::vector<std::size_t> rows(data.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    return fit_tree(data.features, data.targets_s, rows, opts);
}

} // namespace netsched
