#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "posture/dataset.hpp"
#include "posture/matrix.hpp"

namespace posture {

struct TreeConfig {
    std::size_t max_depth = 6;
    std::size_t min_samples_split = 2;
    double min_gain = 0.0;  // a split must beat this strictly
};

// Flat node array, root at index 0; children always follow their parent.
struct TreeNode {
    bool is_leaf = true;
    std::size_t feature = 0;
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::vector<std::int64_t> class_counts;  // leaves only

    bool operator==(const TreeNode&) const = default;
};

struct DecisionTree {
    std::vector<TreeNode> nodes;
    int n_classes = 0;

    bool operator==(const DecisionTree&) const = default;
};

// 1 - sum((count_k / total)^2). Throws DomainError on an all-zero vector.
double gini(std::span<const std::int64_t> class_counts);

struct SplitCandidate {
    std::size_t feature = 0;
    double threshold = 0.0;
    double gain = 0.0;
};

// Greedy search over every feature and every midpoint between consecutive
// distinct sorted values. Returns the maximum-gain candidate with gain
// strictly above min_gain, or nullopt. Ties go to the lowest feature index,
// then the lowest threshold.
std::optional<SplitCandidate> best_split(const Matrix& features, std::span<const int> labels,
                                         int n_classes, double min_gain = 0.0);

// Recursive partitioning until max_depth, min_samples_split, purity, or no
// qualifying split. A non-empty feature_subset restricts the candidate
// features (used by forests); node feature indices stay absolute.
DecisionTree fit_tree(const Matrix& features, std::span<const int> labels, int n_classes,
                      const TreeConfig& config = {},
                      std::span<const std::size_t> feature_subset = {});
DecisionTree fit_tree(const Dataset& train, const TreeConfig& config = {});

// Descend (value < threshold goes left), then argmax of leaf counts with
// lowest-class-id tie-break.
int predict_tree(const DecisionTree& tree, std::span<const double> row);

}  // namespace posture
