#include "posture/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "posture/error.hpp"

namespace posture {

std::vector<std::size_t> bootstrap_sample(std::size_t n, Rng& rng) {
    std::vector<std::size_t> sample(n);
    for (std::size_t i = 0; i < n; ++i) sample[i] = rng.uniform_index(n);
    return sample;
}

int majority_vote(std::span<const int> votes) {
    if (votes.empty()) throw DomainError("majority vote over an empty vote list");
    int max_class = 0;
    for (int v : votes) max_class = std::max(max_class, v);
    std::vector<std::size_t> tally(static_cast<std::size_t>(max_class) + 1, 0);
    for (int v : votes) tally[static_cast<std::size_t>(v)] += 1;
    int best = 0;
    for (std::size_t c = 1; c < tally.size(); ++c) {
        if (tally[c] > tally[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
    }
    return best;
}

namespace {

std::size_t resolve_max_features(const ForestConfig& config, std::size_t arity) {
    if (!config.max_features) {
        return static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(arity))));
    }
    return *config.max_features;
}

struct FittedTree {
    DecisionTree tree;
    std::vector<std::size_t> subset;
};

// RNG consumption order is fixed: bootstrap indices first, feature subset
// second. Everything downstream depends on it staying that way.
FittedTree fit_one_tree(const Matrix& features, std::span<const int> labels, int n_classes,
                        const ForestConfig& config, std::size_t max_features,
                        std::size_t tree_index) {
    Rng rng(derive_seed(config.seed, tree_index));
    const std::size_t n = features.rows;

    std::vector<std::size_t> rows;
    if (config.bootstrap) {
        rows = bootstrap_sample(n, rng);
    } else {
        rows.resize(n);
        std::iota(rows.begin(), rows.end(), std::size_t{0});
    }

    std::vector<std::size_t> pool(features.cols);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < max_features; ++i) {
        std::swap(pool[i], pool[i + rng.uniform_index(pool.size() - i)]);
    }
    std::vector<std::size_t> subset(pool.begin(), pool.begin() + max_features);
    std::sort(subset.begin(), subset.end());

    Matrix sample_features = take_rows(features, rows);
    std::vector<int> sample_labels(n);
    for (std::size_t i = 0; i < n; ++i) sample_labels[i] = labels[rows[i]];

    FittedTree fitted;
    fitted.tree = fit_tree(sample_features, sample_labels, n_classes, config.tree, subset);
    fitted.subset = std::move(subset);
    return fitted;
}

}  // namespace

Forest fit_forest(const Matrix& features, std::span<const int> labels, int n_classes,
                  const ForestConfig& config) {
    if (features.rows == 0) throw DataError("cannot fit a forest on an empty dataset");
    if (config.n_trees < 1) throw ConfigError("a forest needs at least one tree");
    const std::size_t max_features = resolve_max_features(config, features.cols);
    if (max_features < 1 || max_features > features.cols) {
        throw ConfigError("max_features must lie in [1, arity]");
    }

    std::vector<FittedTree> fitted(config.n_trees);
    std::size_t n_threads = config.n_threads;
    if (n_threads == 0) {
        n_threads = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    }
    n_threads = std::min(n_threads, config.n_trees);

    if (n_threads <= 1) {
        for (std::size_t i = 0; i < config.n_trees; ++i) {
            fitted[i] = fit_one_tree(features, labels, n_classes, config, max_features, i);
        }
    } else {
        std::vector<std::thread> workers;
        workers.reserve(n_threads);
        for (std::size_t w = 0; w < n_threads; ++w) {
            workers.emplace_back([&, w] {
                for (std::size_t i = w; i < config.n_trees; i += n_threads) {
                    fitted[i] = fit_one_tree(features, labels, n_classes, config, max_features, i);
                }
            });
        }
        for (auto& t : workers) t.join();
    }

    Forest forest;
    forest.config = config;
    forest.n_classes = n_classes;
    forest.trees.reserve(config.n_trees);
    forest.feature_subsets.reserve(config.n_trees);
    for (auto& f : fitted) {
        forest.trees.push_back(std::move(f.tree));
        forest.feature_subsets.push_back(std::move(f.subset));
    }
    return forest;
}

Forest fit_forest(const Dataset& train, const ForestConfig& config) {
    return fit_forest(train.features, train.labels, train.schema.n_classes(), config);
}

int predict_forest(const Forest& forest, std::span<const double> row) {
    std::vector<int> votes;
    votes.reserve(forest.trees.size());
    for (const auto& tree : forest.trees) votes.push_back(predict_tree(tree, row));
    return majority_vote(votes);
}

}  // namespace posture
