#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "posture/dataset.hpp"

namespace posture {

struct ConfusionMatrix {
    int n_classes = 0;
    std::vector<std::int64_t> counts;  // K*K row-major, [true][predicted]

    ConfusionMatrix() = default;
    explicit ConfusionMatrix(int k)
        : n_classes(k), counts(static_cast<std::size_t>(k) * static_cast<std::size_t>(k), 0) {}

    std::int64_t& at(int true_class, int predicted) {
        return counts[static_cast<std::size_t>(true_class) * static_cast<std::size_t>(n_classes) +
                      static_cast<std::size_t>(predicted)];
    }
    std::int64_t at(int true_class, int predicted) const {
        return counts[static_cast<std::size_t>(true_class) * static_cast<std::size_t>(n_classes) +
                      static_cast<std::size_t>(predicted)];
    }
    std::int64_t total() const;

    bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred,
                                 int n_classes);

struct MetricSet {
    double accuracy = 0.0;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
};

// accuracy = trace/total; macro metrics average over all K classes
// uniformly with the 0/0 -> 0 convention per class.
MetricSet metric_set(const ConfusionMatrix& cm);

enum class Algorithm { tree = 0, forest = 1, boost = 2 };

inline constexpr std::array<const char*, 3> kAlgorithmKeys = {"tree", "forest", "boost"};
inline constexpr std::array<const char*, 3> kAlgorithmNames = {"Decision tree", "Random forest",
                                                               "Gradient boosting"};

struct EvaluationCell {
    MetricSet metrics;
    ConfusionMatrix confusion;
};

struct ReportProvenance {
    std::size_t n_total = 0;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    std::uint64_t seed = 0;
    double test_fraction = 0.0;
    std::string mode;  // "paper" or "oof"
    std::string data_fingerprint;
};

// 2 layers x 3 algorithms, mirroring the layered evaluation grid.
struct MetricsReport {
    ReportProvenance provenance;
    std::array<std::array<EvaluationCell, 3>, 2> grid;
    std::optional<CorrelationMatrix> correlation;

    const EvaluationCell& cell(int layer, Algorithm algo) const {
        return grid[static_cast<std::size_t>(layer - 1)][static_cast<std::size_t>(algo)];
    }
    EvaluationCell& cell(int layer, Algorithm algo) {
        return grid[static_cast<std::size_t>(layer - 1)][static_cast<std::size_t>(algo)];
    }
};

enum class ReportFormat { json, table };

// json: stable key order, metric values at fixed 6-decimal precision.
// table: aligned Algorithm | Accuracy | Precision | F1 | Recall rows per
// layer, percentages with 2 decimals.
std::string render_report(const MetricsReport& report, ReportFormat format);

// Two decimals, round half away from zero: 29/36 renders as "80.56%".
std::string format_percent(double value01);

}  // namespace posture
