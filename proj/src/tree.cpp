#include "posture/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "posture/error.hpp"

namespace posture {

double gini(std::span<const std::int64_t> class_counts) {
    std::int64_t total = 0;
    for (std::int64_t c : class_counts) total += c;
    if (total <= 0) throw DomainError("gini requires a positive total count");
    double sum_sq = 0.0;
    for (std::int64_t c : class_counts) {
        const double p = static_cast<double>(c) / static_cast<double>(total);
        sum_sq += p * p;
    }
    return 1.0 - sum_sq;
}

namespace {

std::vector<std::int64_t> count_classes(std::span<const int> labels,
                                        std::span<const std::size_t> rows, int n_classes) {
    std::vector<std::int64_t> counts(static_cast<std::size_t>(n_classes), 0);
    for (std::size_t r : rows) counts[static_cast<std::size_t>(labels[r])] += 1;
    return counts;
}

// Split search over a row subset. Candidate features are scanned in the
// given (ascending) order and thresholds ascending, so keeping the first
// strictly-better candidate implements the documented tie-break.
std::optional<SplitCandidate> best_split_rows(const Matrix& features, std::span<const int> labels,
                                              std::span<const std::size_t> rows, int n_classes,
                                              double min_gain,
                                              std::span<const std::size_t> candidate_features) {
    const std::size_t m = rows.size();
    if (m < 2) return std::nullopt;

    const auto parent_counts = count_classes(labels, rows, n_classes);
    const double parent_gini = gini(parent_counts);

    std::optional<SplitCandidate> best;
    double best_gain = min_gain;

    std::vector<std::pair<double, int>> sorted(m);
    std::vector<std::int64_t> left(static_cast<std::size_t>(n_classes));
    std::vector<std::int64_t> right(static_cast<std::size_t>(n_classes));

    for (std::size_t f : candidate_features) {
        for (std::size_t i = 0; i < m; ++i) {
            sorted[i] = {features.at(rows[i], f), labels[rows[i]]};
        }
        std::sort(sorted.begin(), sorted.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });

        std::fill(left.begin(), left.end(), 0);
        std::copy(parent_counts.begin(), parent_counts.end(), right.begin());

        for (std::size_t i = 1; i < m; ++i) {
            const auto cls = static_cast<std::size_t>(sorted[i - 1].second);
            left[cls] += 1;
            right[cls] -= 1;
            if (sorted[i].first == sorted[i - 1].first) continue;

            const double threshold = (sorted[i - 1].first + sorted[i].first) / 2.0;
            const double n_left = static_cast<double>(i);
            const double n_right = static_cast<double>(m - i);
            const double child =
                (n_left * gini(left) + n_right * gini(right)) / static_cast<double>(m);
            const double gain = parent_gini - child;
            if (gain > best_gain) {
                best_gain = gain;
                best = SplitCandidate{f, threshold, gain};
            }
        }
    }
    return best;
}

struct TreeBuilder {
    const Matrix& features;
    std::span<const int> labels;
    int n_classes;
    const TreeConfig& config;
    std::span<const std::size_t> candidate_features;
    std::vector<TreeNode> nodes;

    std::int32_t make_leaf(std::span<const std::size_t> rows) {
        TreeNode node;
        node.is_leaf = true;
        node.class_counts = count_classes(labels, rows, n_classes);
        nodes.push_back(std::move(node));
        return static_cast<std::int32_t>(nodes.size() - 1);
    }

    std::int32_t build(std::span<const std::size_t> rows, std::size_t depth) {
        const auto counts = count_classes(labels, rows, n_classes);
        const bool pure =
            std::count_if(counts.begin(), counts.end(), [](std::int64_t c) { return c > 0; }) <= 1;
        if (depth >= config.max_depth || rows.size() < config.min_samples_split || pure) {
            return make_leaf(rows);
        }

        const auto split = best_split_rows(features, labels, rows, n_classes, config.min_gain,
                                           candidate_features);
        if (!split) return make_leaf(rows);

        std::vector<std::size_t> left_rows, right_rows;
        for (std::size_t r : rows) {
            if (features.at(r, split->feature) < split->threshold) {
                left_rows.push_back(r);
            } else {
                right_rows.push_back(r);
            }
        }
        // Degenerate partitions can only arise from midpoint rounding on
        // adjacent float values; treat them as unsplittable.
        if (left_rows.empty() || right_rows.empty()) return make_leaf(rows);

        TreeNode node;
        node.is_leaf = false;
        node.feature = split->feature;
        node.threshold = split->threshold;
        nodes.push_back(std::move(node));
        const auto index = static_cast<std::int32_t>(nodes.size() - 1);
        const auto left = build(left_rows, depth + 1);
        const auto right = build(right_rows, depth + 1);
        nodes[static_cast<std::size_t>(index)].left = left;
        nodes[static_cast<std::size_t>(index)].right = right;
        return index;
    }
};

}  // namespace

std::optional<SplitCandidate> best_split(const Matrix& features, std::span<const int> labels,
                                         int n_classes, double min_gain) {
    if (features.rows != labels.size()) {
        throw DomainError("feature row count does not match label count");
    }
    if (features.rows < 2) return std::nullopt;
    std::vector<std::size_t> rows(features.rows);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    std::vector<std::size_t> all_features(features.cols);
    std::iota(all_features.begin(), all_features.end(), std::size_t{0});
    return best_split_rows(features, labels, rows, n_classes, min_gain, all_features);
}

DecisionTree fit_tree(const Matrix& features, std::span<const int> labels, int n_classes,
                      const TreeConfig& config, std::span<const std::size_t> feature_subset) {
    if (features.rows == 0) throw DataError("cannot fit a tree on an empty dataset");
    if (features.rows != labels.size()) {
        throw DataError("feature row count does not match label count");
    }
    if (config.min_samples_split < 2) {
        throw ConfigError("min_samples_split must be at least 2");
    }

    std::vector<std::size_t> all_features;
    if (feature_subset.empty()) {
        all_features.resize(features.cols);
        std::iota(all_features.begin(), all_features.end(), std::size_t{0});
        feature_subset = all_features;
    }

    std::vector<std::size_t> rows(features.rows);
    std::iota(rows.begin(), rows.end(), std::size_t{0});

    TreeBuilder builder{features, labels, n_classes, config, feature_subset, {}};
    builder.build(rows, 0);

    DecisionTree tree;
    tree.nodes = std::move(builder.nodes);
    tree.n_classes = n_classes;
    return tree;
}

DecisionTree fit_tree(const Dataset& train, const TreeConfig& config) {
    return fit_tree(train.features, train.labels, train.schema.n_classes(), config);
}

int predict_tree(const DecisionTree& tree, std::span<const double> row) {
    for (double v : row) {
        if (!std::isfinite(v)) throw PredictError("non-finite feature value in prediction row");
    }
    const TreeNode* node = &tree.nodes.front();
    while (!node->is_leaf) {
        if (row[node->feature] < node->threshold) {
            node = &tree.nodes[static_cast<std::size_t>(node->left)];
        } else {
            node = &tree.nodes[static_cast<std::size_t>(node->right)];
        }
    }
    int best = 0;
    std::int64_t best_count = node->class_counts[0];
    for (std::size_t c = 1; c < node->class_counts.size(); ++c) {
        if (node->class_counts[c] > best_count) {
            best_count = node->class_counts[c];
            best = static_cast<int>(c);
        }
    }
    return best;
}

}  // namespace posture
