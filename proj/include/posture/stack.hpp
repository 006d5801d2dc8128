#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "posture/boost.hpp"
#include "posture/dataset.hpp"
#include "posture/forest.hpp"
#include "posture/metrics.hpp"
#include "posture/tree.hpp"

namespace posture {

// paper: layer 2 trains on the layer-1 models' in-sample predictions over
// the very rows those models were fit on. Faithful to the published
// protocol, but leaks fitted-model confidence into the meta features.
// oof: layer 2 trains on k-fold out-of-fold predictions instead.
enum class StackMode { paper, oof };

enum class MetaInput { augmented, predictions_only };

struct LayerConfig {
    TreeConfig tree;
    ForestConfig forest;
    BoostConfig boost;
};

struct StackConfig {
    StackMode mode = StackMode::oof;
    std::size_t k_folds = 5;  // oof mode only
    MetaInput meta_input = MetaInput::augmented;
    // Master seed; forest seeds and the fold shuffle derive from it, so the
    // ForestConfig::seed fields inside the layer configs are ignored here.
    std::uint64_t seed = 42;
    LayerConfig layer1;
    LayerConfig layer2;
};

struct StackedModel {
    FeatureSchema schema;
    ScalerParams scaler;
    DecisionTree l1_tree;
    Forest l1_forest;
    BoostedModel l1_boost;
    DecisionTree l2_tree;
    Forest l2_forest;
    BoostedModel l2_boost;
    StackConfig config;
    std::size_t meta_arity = 0;  // 4 + 3K augmented, 3K predictions_only
};

struct LayeredPredictions {
    std::array<int, 3> layer1;  // tree, forest, boost
    std::array<int, 3> layer2;
};

// augmented: the feature block followed by three one-hot blocks of length
// n_classes (tree, forest, boost order). predictions_only: the one-hots.
std::vector<double> meta_features(std::span<const double> features,
                                  const std::array<int, 3>& base_predictions, int n_classes,
                                  MetaInput mode);

// Fold bookkeeping from an oof fit, exposed so tests can verify that a
// row's meta features never came from a model that saw that row.
struct StackFitInfo {
    std::vector<int> fold_of;                                // per train row; empty in paper mode
    std::vector<std::vector<std::size_t>> fold_train_rows;   // rows fitted per fold clone
    Matrix meta_inputs;                                      // layer-2 training matrix
};

StackedModel fit_stack(const Dataset& train, const StackConfig& config,
                       StackFitInfo* info = nullptr);

// Takes a raw (unscaled) feature row of schema arity.
LayeredPredictions predict_stack(const StackedModel& model, std::span<const double> row);

// Per-(layer, algorithm) confusion matrices and metric sets over a raw
// held-out dataset.
MetricsReport evaluate_stack(const StackedModel& model, const Dataset& test);

}  // namespace posture
