#include <algorithm>
#include <set>
#include <vector>

#include "doctest.h"
#include "posture/error.hpp"
#include "posture/forest.hpp"
#include "posture/model_io.hpp"

using namespace posture;

namespace {

Dataset fixture(std::size_t n = 180) { return generate(SynthParams::separated(), n); }

std::string forest_fingerprint(const Forest& forest) { return forest_to_json(forest).dump(); }

}  // namespace

TEST_CASE("bootstrap_sample basics") {
    SUBCASE("single-element universe") {
        Rng rng(99);
        const auto sample = bootstrap_sample(1, rng);
        CHECK(sample == std::vector<std::size_t>{0});
    }
    SUBCASE("deterministic per rng state") {
        Rng a(7), b(7);
        CHECK(bootstrap_sample(50, a) == bootstrap_sample(50, b));
    }
    SUBCASE("distinct fraction near 1 - 1/e") {
        // E[distinct] = 50 (1 - (1 - 1/50)^50) ~ 31.8; [20, 42] is a wide band.
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            Rng rng(seed);
            const auto sample = bootstrap_sample(50, rng);
            const std::set<std::size_t> distinct(sample.begin(), sample.end());
            CHECK(distinct.size() >= 20);
            CHECK(distinct.size() <= 42);
        }
    }
}

TEST_CASE("majority_vote counts and tie-breaks") {
    CHECK(majority_vote(std::vector<int>{0, 0, 2}) == 0);
    CHECK(majority_vote(std::vector<int>{0, 1, 2}) == 0);
    std::vector<int> votes;
    votes.insert(votes.end(), 33, 0);
    votes.insert(votes.end(), 34, 1);
    votes.insert(votes.end(), 33, 2);
    CHECK(majority_vote(votes) == 1);
    CHECK_THROWS_AS(majority_vote(std::vector<int>{}), DomainError);
}

TEST_CASE("degenerate forest equals a plain decision tree") {
    const Dataset data = fixture(90);
    ForestConfig config;
    config.n_trees = 1;
    config.bootstrap = false;
    config.max_features = 4;
    const Forest forest = fit_forest(data, config);
    const DecisionTree tree = fit_tree(data, config.tree);
    CHECK(forest.trees[0] == tree);

    const Dataset probe = generate(SynthParams::noisy(), 300);
    for (std::size_t r = 0; r < probe.size(); ++r) {
        CHECK(predict_forest(forest, probe.features.row(r)) ==
              predict_tree(tree, probe.features.row(r)));
    }
}

TEST_CASE("forest fits are deterministic, parallel or not") {
    const Dataset data = fixture(120);
    ForestConfig config;
    config.n_trees = 24;
    config.seed = 17;
    config.n_threads = 1;
    const Forest sequential = fit_forest(data, config);
    config.n_threads = 4;
    const Forest parallel = fit_forest(data, config);
    CHECK(forest_fingerprint(sequential) == forest_fingerprint(parallel));

    const Forest again = fit_forest(data, config);
    CHECK(forest_fingerprint(parallel) == forest_fingerprint(again));
}

TEST_CASE("default forest separates the separable fixture") {
    const Dataset data = fixture(180);
    ForestConfig config;
    config.seed = 42;
    const Forest forest = fit_forest(data, config);
    CHECK(forest.trees.size() == 100);
    for (const auto& subset : forest.feature_subsets) {
        CHECK(subset.size() == 2);  // ceil(sqrt(4))
    }
    std::size_t hits = 0;
    for (std::size_t r = 0; r < data.size(); ++r) {
        if (predict_forest(forest, data.features.row(r)) == data.labels[r]) ++hits;
    }
    CHECK(hits == data.size());
}

TEST_CASE("predict_forest is a brute-force tally over tree votes") {
    const Dataset data = fixture(90);
    ForestConfig config;
    config.n_trees = 15;
    config.seed = 3;
    const Forest forest = fit_forest(data, config);

    const Dataset probe = generate(SynthParams::noisy(), 999);
    for (std::size_t r = 0; r < probe.size(); ++r) {
        const auto row = probe.features.row(r);
        std::array<std::size_t, 3> tally = {0, 0, 0};
        for (const auto& tree : forest.trees) {
            tally[static_cast<std::size_t>(predict_tree(tree, row))] += 1;
        }
        int expected = 0;
        for (int c = 1; c < 3; ++c) {
            if (tally[static_cast<std::size_t>(c)] > tally[static_cast<std::size_t>(expected)]) {
                expected = c;
            }
        }
        CHECK(predict_forest(forest, row) == expected);
    }
}

TEST_CASE("hand-built three-tree forest votes 1") {
    const auto constant_tree = [](int winner) {
        DecisionTree tree;
        tree.n_classes = 3;
        TreeNode leaf;
        leaf.class_counts = {0, 0, 0};
        leaf.class_counts[static_cast<std::size_t>(winner)] = 5;
        tree.nodes.push_back(leaf);
        return tree;
    };
    Forest forest;
    forest.n_classes = 3;
    forest.trees = {constant_tree(1), constant_tree(2), constant_tree(1)};
    forest.feature_subsets = {{0}, {1}, {2}};
    CHECK(predict_forest(forest, std::vector<double>{0, 0, 0, 0}) == 1);

    forest.trees = {constant_tree(2), constant_tree(2), constant_tree(2)};
    CHECK(predict_forest(forest, std::vector<double>{0, 0, 0, 0}) == 2);
}

TEST_CASE("forest configuration is validated") {
    const Dataset data = fixture(9);
    ForestConfig config;
    config.n_trees = 0;
    CHECK_THROWS_AS(fit_forest(data, config), ConfigError);
    config.n_trees = 1;
    config.max_features = 5;
    CHECK_THROWS_AS(fit_forest(data, config), ConfigError);
    config.max_features = 0;
    CHECK_THROWS_AS(fit_forest(data, config), ConfigError);
}
