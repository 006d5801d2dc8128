#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "posture/stack.hpp"

namespace posture {

inline constexpr int kModelFormatVersion = 1;

struct ModelMetadata {
    std::uint64_t seed = 0;
    std::string data_fingerprint;
};

// Single versioned JSON document holding the scaler, config echo, and all
// six sub-models. Written atomically (temp file + rename).
void save_model(const StackedModel& model, const std::filesystem::path& path,
                const ModelMetadata& metadata = {});

struct LoadedModel {
    StackedModel model;
    ModelMetadata metadata;
};

// Throws ModelIoError naming the first invalid field; an unknown
// format_version is reported as a version error before anything else is
// decoded.
LoadedModel load_model(const std::filesystem::path& path);

// FNV-1a 64 over the feature bits and labels; stable identity for a
// dataset independent of its file representation.
std::string data_fingerprint(const Dataset& data);

void write_file_atomic(const std::filesystem::path& path, const std::string& content);

nlohmann::ordered_json tree_to_json(const DecisionTree& tree);
DecisionTree tree_from_json(const nlohmann::json& j, const std::string& context);

nlohmann::ordered_json forest_to_json(const Forest& forest);
Forest forest_from_json(const nlohmann::json& j, const std::string& context);

nlohmann::ordered_json boost_to_json(const BoostedModel& model);
BoostedModel boost_from_json(const nlohmann::json& j, const std::string& context);

nlohmann::ordered_json model_to_json(const StackedModel& model, const ModelMetadata& metadata);

}  // namespace posture
