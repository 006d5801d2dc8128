#include "posture/stack.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "posture/error.hpp"
#include "posture/rng.hpp"

namespace posture {

std::vector<double> meta_features(std::span<const double> features,
                                  const std::array<int, 3>& base_predictions, int n_classes,
                                  MetaInput mode) {
    std::vector<double> meta;
    const auto k = static_cast<std::size_t>(n_classes);
    meta.reserve((mode == MetaInput::augmented ? features.size() : 0) + 3 * k);
    if (mode == MetaInput::augmented) {
        meta.assign(features.begin(), features.end());
    }
    for (int pred : base_predictions) {
        for (std::size_t c = 0; c < k; ++c) {
            meta.push_back(static_cast<int>(c) == pred ? 1.0 : 0.0);
        }
    }
    return meta;
}

namespace {

// Seed roles under the stack's master seed.
constexpr std::uint64_t kFoldSeedRole = 0;
constexpr std::uint64_t kLayer1ForestRole = 1;
constexpr std::uint64_t kLayer2ForestRole = 2;

struct BaseModels {
    DecisionTree tree;
    Forest forest;
    BoostedModel boost;
};

BaseModels fit_bases(const Matrix& features, std::span<const int> labels, int n_classes,
                     const LayerConfig& config, std::uint64_t forest_seed) {
    BaseModels bases;
    bases.tree = fit_tree(features, labels, n_classes, config.tree);
    ForestConfig forest_config = config.forest;
    forest_config.seed = forest_seed;
    bases.forest = fit_forest(features, labels, n_classes, forest_config);
    bases.boost = fit_boost(features, labels, n_classes, config.boost);
    return bases;
}

std::array<int, 3> predict_bases(const BaseModels& bases, std::span<const double> row) {
    return {predict_tree(bases.tree, row), predict_forest(bases.forest, row),
            predict_boost(bases.boost, row)};
}

// Stratified fold assignment: per class, shuffled then dealt round-robin.
std::vector<int> assign_folds(std::span<const int> labels, int n_classes, std::size_t k_folds,
                              std::uint64_t seed) {
    std::vector<int> fold_of(labels.size(), -1);
    Rng rng(seed);
    for (int c = 0; c < n_classes; ++c) {
        std::vector<std::size_t> class_rows;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == c) class_rows.push_back(i);
        }
        if (class_rows.size() < k_folds) {
            throw ConfigError("class '" + std::to_string(c) + "' has fewer members than k_folds");
        }
        rng.shuffle(class_rows);
        for (std::size_t i = 0; i < class_rows.size(); ++i) {
            fold_of[class_rows[i]] = static_cast<int>(i % k_folds);
        }
    }
    return fold_of;
}

}  // namespace

StackedModel fit_stack(const Dataset& train, const StackConfig& config, StackFitInfo* info) {
    if (train.size() == 0) throw DataError("cannot fit a stacked model on an empty dataset");
    if (config.mode == StackMode::oof && config.k_folds < 2) {
        throw ConfigError("k_folds must be at least 2 in oof mode");
    }

    const int n_classes = train.schema.n_classes();
    const std::size_t n = train.size();

    StackedModel model;
    model.schema = train.schema;
    model.config = config;
    model.scaler = fit_scaler(train);
    const Dataset scaled = apply_scaler(model.scaler, train);

    // Layer 1 always fits on the full (scaled) training set; these are the
    // models used at inference time in both modes.
    BaseModels layer1 = fit_bases(scaled.features, scaled.labels, n_classes, config.layer1,
                                  derive_seed(config.seed, kLayer1ForestRole));

    // Base predictions feeding layer 2.
    std::vector<std::array<int, 3>> base_preds(n);
    if (config.mode == StackMode::paper) {
        for (std::size_t i = 0; i < n; ++i) {
            base_preds[i] = predict_bases(layer1, scaled.features.row(i));
        }
        if (info) {
            info->fold_of.clear();
            info->fold_train_rows.clear();
        }
    } else {
        const auto fold_of = assign_folds(scaled.labels, n_classes, config.k_folds,
                                          derive_seed(config.seed, kFoldSeedRole));
        std::vector<std::vector<std::size_t>> fold_train_rows(config.k_folds);
        for (std::size_t fold = 0; fold < config.k_folds; ++fold) {
            std::vector<std::size_t> fit_rows, held_out;
            for (std::size_t i = 0; i < n; ++i) {
                (fold_of[i] == static_cast<int>(fold) ? held_out : fit_rows).push_back(i);
            }
            Matrix fold_features = take_rows(scaled.features, fit_rows);
            std::vector<int> fold_labels(fit_rows.size());
            for (std::size_t i = 0; i < fit_rows.size(); ++i) {
                fold_labels[i] = scaled.labels[fit_rows[i]];
            }
            const BaseModels clones =
                fit_bases(fold_features, fold_labels, n_classes, config.layer1,
                          derive_seed(config.seed, kLayer1ForestRole));
            for (std::size_t i : held_out) {
                base_preds[i] = predict_bases(clones, scaled.features.row(i));
            }
            fold_train_rows[fold] = std::move(fit_rows);
        }
        if (info) {
            info->fold_of = fold_of;
            info->fold_train_rows = std::move(fold_train_rows);
        }
    }

    // Layer-2 training matrix.
    model.meta_arity = (config.meta_input == MetaInput::augmented ? train.schema.arity() : 0) +
                       3 * static_cast<std::size_t>(n_classes);
    Matrix meta(n, model.meta_arity);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row =
            meta_features(scaled.features.row(i), base_preds[i], n_classes, config.meta_input);
        std::copy(row.begin(), row.end(), meta.row(i).begin());
    }

    BaseModels layer2 = fit_bases(meta, scaled.labels, n_classes, config.layer2,
                                  derive_seed(config.seed, kLayer2ForestRole));

    if (info) info->meta_inputs = meta;

    model.l1_tree = std::move(layer1.tree);
    model.l1_forest = std::move(layer1.forest);
    model.l1_boost = std::move(layer1.boost);
    model.l2_tree = std::move(layer2.tree);
    model.l2_forest = std::move(layer2.forest);
    model.l2_boost = std::move(layer2.boost);
    return model;
}

namespace {

std::vector<double> scale_row(const StackedModel& model, std::span<const double> row) {
    std::vector<double> scaled(row.size());
    for (std::size_t c = 0; c < row.size(); ++c) {
        const double std_dev = model.scaler.stds[c];
        scaled[c] = std_dev == 0.0 ? 0.0 : (row[c] - model.scaler.means[c]) / std_dev;
    }
    return scaled;
}

}  // namespace

LayeredPredictions predict_stack(const StackedModel& model, std::span<const double> row) {
    if (row.size() != model.schema.arity()) {
        throw PredictError("prediction row arity does not match the model schema");
    }
    for (double v : row) {
        if (!std::isfinite(v)) throw PredictError("non-finite feature value in prediction row");
    }

    const auto scaled = scale_row(model, row);
    LayeredPredictions preds;
    preds.layer1 = {predict_tree(model.l1_tree, scaled), predict_forest(model.l1_forest, scaled),
                    predict_boost(model.l1_boost, scaled)};
    const auto meta = meta_features(scaled, preds.layer1, model.schema.n_classes(),
                                    model.config.meta_input);
    preds.layer2 = {predict_tree(model.l2_tree, meta), predict_forest(model.l2_forest, meta),
                    predict_boost(model.l2_boost, meta)};
    return preds;
}

MetricsReport evaluate_stack(const StackedModel& model, const Dataset& test) {
    if (test.size() == 0) throw DataError("cannot evaluate on an empty dataset");
    if (test.schema.feature_names != model.schema.feature_names) {
        throw DataError("evaluation dataset schema does not match the model schema");
    }

    const std::size_t n = test.size();
    std::array<std::vector<int>, 3> l1_preds, l2_preds;
    for (auto& v : l1_preds) v.resize(n);
    for (auto& v : l2_preds) v.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto preds = predict_stack(model, test.features.row(i));
        for (std::size_t a = 0; a < 3; ++a) {
            l1_preds[a][i] = preds.layer1[a];
            l2_preds[a][i] = preds.layer2[a];
        }
    }

    MetricsReport report;
    report.provenance.n_test = n;
    report.provenance.mode = model.config.mode == StackMode::paper ? "paper" : "oof";
    const int k = model.schema.n_classes();
    for (std::size_t a = 0; a < 3; ++a) {
        auto& l1_cell = report.grid[0][a];
        l1_cell.confusion = confusion_matrix(test.labels, l1_preds[a], k);
        l1_cell.metrics = metric_set(l1_cell.confusion);
        auto& l2_cell = report.grid[1][a];
        l2_cell.confusion = confusion_matrix(test.labels, l2_preds[a], k);
        l2_cell.metrics = metric_set(l2_cell.confusion);
    }
    return report;
}

}  // namespace posture
