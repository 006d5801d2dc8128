#include "posture/boost.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "posture/error.hpp"

namespace posture {

std::vector<double> softmax(std::span<const double> logits) {
    const double max_logit = *std::max_element(logits.begin(), logits.end());
    std::vector<double> probs(logits.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < logits.size(); ++k) {
        probs[k] = std::exp(logits[k] - max_logit);
        sum += probs[k];
    }
    for (double& p : probs) p /= sum;
    return probs;
}

GradHess grad_hess(std::span<const double> probs, int true_class) {
    GradHess gh;
    gh.grad.resize(probs.size());
    gh.hess.resize(probs.size());
    for (std::size_t k = 0; k < probs.size(); ++k) {
        gh.grad[k] = probs[k] - (static_cast<int>(k) == true_class ? 1.0 : 0.0);
        gh.hess[k] = probs[k] * (1.0 - probs[k]);
    }
    return gh;
}

double leaf_weight(double grad_sum, double hess_sum, double lambda) {
    const double denom = hess_sum + lambda;
    if (denom == 0.0) throw DomainError("degenerate leaf: hessian sum plus lambda is zero");
    return -grad_sum / denom;
}

double split_gain(double grad_left, double hess_left, double grad_right, double hess_right,
                  double lambda, double gamma) {
    const double parent_grad = grad_left + grad_right;
    const double parent_hess = hess_left + hess_right;
    return 0.5 * (grad_left * grad_left / (hess_left + lambda) +
                  grad_right * grad_right / (hess_right + lambda) -
                  parent_grad * parent_grad / (parent_hess + lambda)) -
           gamma;
}

namespace {

// Structure score with a guard for lambda == 0 nodes that carry no hessian
// mass; 0 is the limiting value.
double score_term(double g, double h, double lambda) {
    const double denom = h + lambda;
    if (denom == 0.0) return 0.0;
    return g * g / denom;
}

struct RegSplit {
    std::size_t feature = 0;
    double threshold = 0.0;
    double gain = 0.0;
};

struct RegTreeBuilder {
    std::span<const double> gradients;
    std::span<const double> hessians;
    const Matrix& features;
    const BoostConfig& config;
    std::vector<RegressionNode> nodes;

    // Max raw gain (gamma excluded) over all features and midpoints between
    // consecutive distinct sorted values; same tie-break order as the
    // classification trees.
    std::optional<RegSplit> find_split(std::span<const std::size_t> rows, double parent_grad,
                                       double parent_hess) {
        const std::size_t m = rows.size();
        if (m < 2) return std::nullopt;
        const double parent_score = score_term(parent_grad, parent_hess, config.lambda);

        std::optional<RegSplit> best;
        double best_gain = 0.0;

        std::vector<std::pair<double, std::size_t>> sorted(m);
        for (std::size_t f = 0; f < features.cols; ++f) {
            for (std::size_t i = 0; i < m; ++i) {
                sorted[i] = {features.at(rows[i], f), rows[i]};
            }
            std::sort(sorted.begin(), sorted.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });

            double grad_left = 0.0, hess_left = 0.0;
            for (std::size_t i = 1; i < m; ++i) {
                grad_left += gradients[sorted[i - 1].second];
                hess_left += hessians[sorted[i - 1].second];
                if (sorted[i].first == sorted[i - 1].first) continue;

                const double grad_right = parent_grad - grad_left;
                const double hess_right = parent_hess - hess_left;
                const double gain = 0.5 * (score_term(grad_left, hess_left, config.lambda) +
                                           score_term(grad_right, hess_right, config.lambda) -
                                           parent_score);
                if (gain > best_gain) {
                    best_gain = gain;
                    best = RegSplit{f, (sorted[i - 1].first + sorted[i].first) / 2.0, gain};
                }
            }
        }
        return best;
    }

    std::int32_t make_leaf(double grad_sum, double hess_sum) {
        RegressionNode node;
        node.is_leaf = true;
        node.weight = leaf_weight(grad_sum, hess_sum, config.lambda);
        node.grad_sum = grad_sum;
        node.hess_sum = hess_sum;
        nodes.push_back(node);
        return static_cast<std::int32_t>(nodes.size() - 1);
    }

    std::int32_t build(std::span<const std::size_t> rows, std::size_t depth) {
        double grad_sum = 0.0, hess_sum = 0.0;
        for (std::size_t r : rows) {
            grad_sum += gradients[r];
            hess_sum += hessians[r];
        }
        if (depth >= config.max_depth) return make_leaf(grad_sum, hess_sum);

        const auto split = find_split(rows, grad_sum, hess_sum);
        if (!split) return make_leaf(grad_sum, hess_sum);

        std::vector<std::size_t> left_rows, right_rows;
        for (std::size_t r : rows) {
            if (features.at(r, split->feature) < split->threshold) {
                left_rows.push_back(r);
            } else {
                right_rows.push_back(r);
            }
        }
        if (left_rows.empty() || right_rows.empty()) return make_leaf(grad_sum, hess_sum);

        RegressionNode node;
        node.is_leaf = false;
        node.feature = split->feature;
        node.threshold = split->threshold;
        node.gain = split->gain;
        node.grad_sum = grad_sum;
        node.hess_sum = hess_sum;
        nodes.push_back(node);
        const auto index = static_cast<std::int32_t>(nodes.size() - 1);
        const auto left = build(left_rows, depth + 1);
        const auto right = build(right_rows, depth + 1);
        nodes[static_cast<std::size_t>(index)].left = left;
        nodes[static_cast<std::size_t>(index)].right = right;
        return index;
    }

    // Bottom-up: a split whose children are leaves and whose raw gain is
    // below gamma collapses into a leaf; the collapse can cascade upward.
    void prune(std::int32_t index) {
        RegressionNode& node = nodes[static_cast<std::size_t>(index)];
        if (node.is_leaf) return;
        prune(node.left);
        prune(node.right);
        const bool children_are_leaves = nodes[static_cast<std::size_t>(node.left)].is_leaf &&
                                         nodes[static_cast<std::size_t>(node.right)].is_leaf;
        if (children_are_leaves && node.gain < config.gamma) {
            node.is_leaf = true;
            node.weight = leaf_weight(node.grad_sum, node.hess_sum, config.lambda);
            node.left = -1;
            node.right = -1;
        }
    }

    // Drop nodes orphaned by pruning; preorder renumbering.
    std::vector<RegressionNode> compact() {
        std::vector<RegressionNode> out;
        out.reserve(nodes.size());
        copy_subtree(0, out);
        return out;
    }

    std::int32_t copy_subtree(std::int32_t index, std::vector<RegressionNode>& out) {
        const RegressionNode& node = nodes[static_cast<std::size_t>(index)];
        out.push_back(node);
        const auto new_index = static_cast<std::int32_t>(out.size() - 1);
        if (!node.is_leaf) {
            const auto left = copy_subtree(node.left, out);
            const auto right = copy_subtree(node.right, out);
            out[static_cast<std::size_t>(new_index)].left = left;
            out[static_cast<std::size_t>(new_index)].right = right;
        }
        return new_index;
    }
};

double log_loss_from_logits(const Matrix& logits, std::span<const int> labels) {
    double total = 0.0;
    for (std::size_t i = 0; i < logits.rows; ++i) {
        const auto probs = softmax(logits.row(i));
        const double p = std::max(probs[static_cast<std::size_t>(labels[i])],
                                  std::numeric_limits<double>::min());
        total -= std::log(p);
    }
    return total / static_cast<double>(logits.rows);
}

}  // namespace

RegressionTree fit_round_tree(std::span<const double> gradients, std::span<const double> hessians,
                              const Matrix& features, const BoostConfig& config) {
    if (gradients.size() != features.rows || hessians.size() != features.rows) {
        throw DomainError("gradient/hessian length does not match row count");
    }
    std::vector<std::size_t> rows(features.rows);
    std::iota(rows.begin(), rows.end(), std::size_t{0});

    RegTreeBuilder builder{gradients, hessians, features, config, {}};
    builder.build(rows, 0);
    builder.prune(0);

    RegressionTree tree;
    tree.nodes = builder.compact();
    return tree;
}

double predict_regression_tree(const RegressionTree& tree, std::span<const double> row) {
    const RegressionNode* node = &tree.nodes.front();
    while (!node->is_leaf) {
        if (row[node->feature] < node->threshold) {
            node = &tree.nodes[static_cast<std::size_t>(node->left)];
        } else {
            node = &tree.nodes[static_cast<std::size_t>(node->right)];
        }
    }
    return node->weight;
}

BoostedModel fit_boost(const Matrix& features, std::span<const int> labels, int n_classes,
                       const BoostConfig& config, std::vector<double>* loss_curve) {
    if (features.rows == 0) throw DataError("cannot fit a boosted model on an empty dataset");
    if (features.rows != labels.size()) {
        throw DataError("feature row count does not match label count");
    }
    if (n_classes < 2) throw ConfigError("boosting needs at least 2 classes");
    if (config.n_rounds < 1) throw ConfigError("n_rounds must be at least 1");
    if (!(config.eta > 0.0 && config.eta <= 1.0)) throw ConfigError("eta must lie in (0, 1]");
    if (config.lambda < 0.0) throw ConfigError("lambda must be non-negative");
    if (config.gamma < 0.0) throw ConfigError("gamma must be non-negative");

    const std::size_t n = features.rows;
    const auto k_classes = static_cast<std::size_t>(n_classes);

    BoostedModel model;
    model.config = config;
    model.n_classes = n_classes;
    model.base_score = 0.0;
    model.trees.assign(k_classes, {});

    Matrix logits(n, k_classes, model.base_score);
    if (loss_curve) {
        loss_curve->clear();
        loss_curve->push_back(log_loss_from_logits(logits, labels));
    }

    std::vector<double> grad(n), hess(n);
    for (std::size_t round = 0; round < config.n_rounds; ++round) {
        Matrix probs(n, k_classes);
        for (std::size_t i = 0; i < n; ++i) {
            const auto p = softmax(logits.row(i));
            std::copy(p.begin(), p.end(), probs.row(i).begin());
        }
        for (std::size_t k = 0; k < k_classes; ++k) {
            for (std::size_t i = 0; i < n; ++i) {
                const double p = probs.at(i, k);
                grad[i] = p - (labels[i] == static_cast<int>(k) ? 1.0 : 0.0);
                hess[i] = p * (1.0 - p);
            }
            RegressionTree tree = fit_round_tree(grad, hess, features, config);
            for (std::size_t i = 0; i < n; ++i) {
                logits.at(i, k) += config.eta * predict_regression_tree(tree, features.row(i));
            }
            model.trees[k].push_back(std::move(tree));
        }
        if (loss_curve) loss_curve->push_back(log_loss_from_logits(logits, labels));
    }
    return model;
}

BoostedModel fit_boost(const Dataset& train, const BoostConfig& config,
                       std::vector<double>* loss_curve) {
    return fit_boost(train.features, train.labels, train.schema.n_classes(), config, loss_curve);
}

std::vector<double> predict_proba(const BoostedModel& model, std::span<const double> row) {
    for (double v : row) {
        if (!std::isfinite(v)) throw PredictError("non-finite feature value in prediction row");
    }
    std::vector<double> logits(static_cast<std::size_t>(model.n_classes), model.base_score);
    for (std::size_t k = 0; k < logits.size(); ++k) {
        for (const auto& tree : model.trees[k]) {
            logits[k] += model.config.eta * predict_regression_tree(tree, row);
        }
    }
    return softmax(logits);
}

int predict_boost(const BoostedModel& model, std::span<const double> row) {
    const auto probs = predict_proba(model, row);
    int best = 0;
    for (std::size_t k = 1; k < probs.size(); ++k) {
        if (probs[k] > probs[static_cast<std::size_t>(best)]) best = static_cast<int>(k);
    }
    return best;
}

}  // namespace posture
