#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "posture/rng.hpp"
#include "posture/tree.hpp"

namespace posture {

struct ForestConfig {
    std::size_t n_trees = 100;
    // nullopt resolves to ceil(sqrt(arity)) at fit time.
    std::optional<std::size_t> max_features;
    bool bootstrap = true;
    TreeConfig tree;
    std::uint64_t seed = 0;
    // Worker threads for tree fitting; 0 picks a hardware default. Results
    // are identical for every thread count.
    std::size_t n_threads = 0;
};

struct Forest {
    std::vector<DecisionTree> trees;
    // Per-tree candidate features, absolute indices, sorted ascending.
    std::vector<std::vector<std::size_t>> feature_subsets;
    ForestConfig config;
    int n_classes = 0;
};

// n uniform draws with replacement from {0..n-1}, in draw order.
std::vector<std::size_t> bootstrap_sample(std::size_t n, Rng& rng);

// Most frequent class; ties go to the lowest class id.
int majority_vote(std::span<const int> votes);

// Tree i derives its own seed from (config.seed, i), so tree-level
// parallelism cannot perturb the result.
Forest fit_forest(const Matrix& features, std::span<const int> labels, int n_classes,
                  const ForestConfig& config);
Forest fit_forest(const Dataset& train, const ForestConfig& config);

int predict_forest(const Forest& forest, std::span<const double> row);

}  // namespace posture
