#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "posture/dataset.hpp"
#include "posture/matrix.hpp"

namespace posture {

struct BoostConfig {
    std::size_t n_rounds = 50;
    double eta = 0.3;      // learning rate, in (0, 1]
    double lambda = 1.0;   // L2 leaf regularization
    double gamma = 0.0;    // split penalty, enforced by backward pruning
    std::size_t max_depth = 3;
};

// Same flat layout as TreeNode, but leaves carry a Newton weight. Split
// nodes keep their raw gain and gradient sums for the pruning pass.
struct RegressionNode {
    bool is_leaf = true;
    std::size_t feature = 0;
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double weight = 0.0;
    double gain = 0.0;
    double grad_sum = 0.0;
    double hess_sum = 0.0;

    bool operator==(const RegressionNode&) const = default;
};

struct RegressionTree {
    std::vector<RegressionNode> nodes;

    bool operator==(const RegressionTree&) const = default;
};

// trees[k][r] is class k's tree from round r. Raw leaf weights; eta is
// applied when logits are accumulated.
struct BoostedModel {
    std::vector<std::vector<RegressionTree>> trees;
    double base_score = 0.0;
    BoostConfig config;
    int n_classes = 0;

    bool operator==(const BoostedModel&) const = default;
};

// Exp-normalized with max subtraction; sums to 1 within 1e-12.
std::vector<double> softmax(std::span<const double> logits);

struct GradHess {
    std::vector<double> grad;
    std::vector<double> hess;
};

// Softmax derivatives: g_k = p_k - 1[k == true_class], h_k = p_k (1 - p_k).
GradHess grad_hess(std::span<const double> probs, int true_class);

// Newton step -G / (H + lambda). Throws DomainError when H + lambda == 0.
double leaf_weight(double grad_sum, double hess_sum, double lambda);

// 0.5 [GL^2/(HL+l) + GR^2/(HR+l) - (GL+GR)^2/(HL+HR+l)] - gamma.
double split_gain(double grad_left, double hess_left, double grad_right, double hess_right,
                  double lambda, double gamma);

// Grows depth-first to max_depth on raw gain (gamma ignored), then prunes
// bottom-up every split whose raw gain falls below gamma.
RegressionTree fit_round_tree(std::span<const double> gradients,
                              std::span<const double> hessians, const Matrix& features,
                              const BoostConfig& config);

double predict_regression_tree(const RegressionTree& tree, std::span<const double> row);

// One tree per class per round on the softmax gradients. When loss_curve is
// given it receives the training log-loss before round 1 and after every
// round (n_rounds + 1 entries).
BoostedModel fit_boost(const Matrix& features, std::span<const int> labels, int n_classes,
                       const BoostConfig& config, std::vector<double>* loss_curve = nullptr);
BoostedModel fit_boost(const Dataset& train, const BoostConfig& config = {},
                       std::vector<double>* loss_curve = nullptr);

std::vector<double> predict_proba(const BoostedModel& model, std::span<const double> row);
int predict_boost(const BoostedModel& model, std::span<const double> row);

}  // namespace posture
