#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "posture/matrix.hpp"

namespace posture {

// Ordered feature/class naming for the physiological pipeline. The shipped
// schema is fixed: four features, three resting-position classes.
struct FeatureSchema {
    std::vector<std::string> feature_names;
    std::vector<std::string> units;
    std::vector<std::string> class_names;

    std::size_t arity() const { return feature_names.size(); }
    int n_classes() const { return static_cast<int>(class_names.size()); }

    // egg, heart_rate, respiration_rate, spo2; classes right=0, supine=1, left=2.
    static FeatureSchema physiological();

    bool operator==(const FeatureSchema&) const = default;
};

struct Dataset {
    FeatureSchema schema;
    Matrix features;          // n x arity
    std::vector<int> labels;  // class codes, one per row

    std::size_t size() const { return labels.size(); }

    bool operator==(const Dataset&) const = default;
};

// Throws DataError when a Dataset invariant is violated (shape mismatch,
// non-finite feature, label out of range, malformed schema).
void validate(const Dataset& data);

// Per-column standardization parameters. Stds use the population formula
// (divide by n), so they are defined even for a single row.
struct ScalerParams {
    std::vector<double> means;
    std::vector<double> stds;

    bool operator==(const ScalerParams&) const = default;
};

// Pearson matrix over the four features plus the encoded position label.
struct CorrelationMatrix {
    std::vector<std::string> labels;
    Matrix values;
};

// Class-conditional Gaussian synthesis; stand-in for the private subject
// recordings. means/stds are indexed [class][feature].
struct SynthParams {
    std::vector<std::vector<double>> means;
    std::vector<std::vector<double>> stds;
    std::vector<double> clamp_lo;  // per feature
    std::vector<double> clamp_hi;
    std::uint64_t seed = 42;

    // Well-separated classes; the default preset.
    static SynthParams separated();
    // Heavily overlapping classes, for probing optimistic evaluation setups.
    static SynthParams noisy();
};

// CSV with header "egg,heart_rate,respiration_rate,spo2,position"; the
// position column accepts class names or integer codes 0-2.
Dataset load_csv(const std::filesystem::path& path, const FeatureSchema& schema);
Dataset load_csv(const std::filesystem::path& path);
void save_csv(const Dataset& data, const std::filesystem::path& path);

struct SplitResult {
    Dataset train;
    Dataset test;
};

// Seeded train/test partition. Both halves keep the original row order.
// Stratified mode rounds the test count per class; remainders stay in train.
SplitResult split(const Dataset& data, double test_fraction, std::uint64_t seed,
                  bool stratified = true);

ScalerParams fit_scaler(const Dataset& train);

// (x - mean) / std per column; zero-std columns map to 0. Labels untouched.
Dataset apply_scaler(const ScalerParams& params, const Dataset& data);

// 5x5 Pearson matrix; position enters as its integer class code. Pairs
// involving a zero-variance variable are 0 by convention; diagonal is 1.
CorrelationMatrix correlation_matrix(const Dataset& data);

std::string correlation_to_text(const CorrelationMatrix& corr);

// n/3 rows per class, clamped to the configured physiological ranges.
// Pure function of (params, n).
Dataset generate(const SynthParams& params, std::size_t n);

Dataset take_rows(const Dataset& data, std::span<const std::size_t> rows);

}  // namespace posture
