#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

namespace posture {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;     // usage, configuration, or data errors
inline constexpr int kExitInternal = 3;  // training or unexpected failures

struct GenerateOptions {
    std::size_t n = 180;
    std::uint64_t seed = 42;
    bool seed_given = false;  // an explicit --seed overrides a params file seed
    std::string preset = "separated";  // separated | noisy
    std::optional<std::filesystem::path> params_file;
    std::filesystem::path out;
};

struct TrainOptions {
    std::filesystem::path data;
    std::string mode = "oof";  // oof | paper
    std::uint64_t seed = 42;
    double test_fraction = 0.2;
    std::size_t k_folds = 5;
    std::string meta_input = "augmented";  // augmented | predictions_only
    std::filesystem::path model_out;
    std::filesystem::path report_out;
    std::optional<std::filesystem::path> train_out;  // optional split echoes
    std::optional<std::filesystem::path> test_out;
};

struct EvaluateOptions {
    std::filesystem::path model;
    std::filesystem::path data;
    std::filesystem::path report_out;
};

struct PredictOptions {
    std::filesystem::path model;
    double egg = 0.0;
    double heart_rate = 0.0;
    double respiration_rate = 0.0;
    double spo2 = 0.0;
};

int cmd_generate(const GenerateOptions& options, std::ostream& out, std::ostream& err);
int cmd_train(const TrainOptions& options, std::ostream& out, std::ostream& err);
int cmd_evaluate(const EvaluateOptions& options, std::ostream& out, std::ostream& err);
int cmd_predict(const PredictOptions& options, std::ostream& out, std::ostream& err);

}  // namespace posture
