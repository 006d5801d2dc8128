#include "posture/model_io.hpp"

#include <bit>
#include <cstdio>
#include <fstream>

#include "posture/error.hpp"

namespace posture {

using nlohmann::json;
using nlohmann::ordered_json;

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw DataError("cannot write file: " + path.string());
        out << content;
        out.flush();
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw DataError("failed while writing file: " + path.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw DataError("cannot move temporary file into place: " + path.string());
    }
}

std::string data_fingerprint(const Dataset& data) {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    const auto mix = [&hash](std::uint64_t v) {
        for (int byte = 0; byte < 8; ++byte) {
            hash ^= (v >> (8 * byte)) & 0xffu;
            hash *= 0x100000001b3ull;
        }
    };
    mix(data.features.rows);
    mix(data.features.cols);
    for (double v : data.features.values) mix(std::bit_cast<std::uint64_t>(v));
    for (int label : data.labels) mix(static_cast<std::uint64_t>(label));
    char buf[32];
    std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx", static_cast<unsigned long long>(hash));
    return std::string(buf);
}

namespace {

[[noreturn]] void missing(const std::string& field) {
    throw ModelIoError("model file: missing or invalid field '" + field + "'");
}

const json& require(const json& j, const char* key, const std::string& context) {
    if (!j.is_object() || !j.contains(key)) missing(context + key);
    return j.at(key);
}

double require_double(const json& j, const char* key, const std::string& context) {
    const json& v = require(j, key, context);
    if (!v.is_number()) missing(context + key);
    return v.get<double>();
}

std::int64_t require_int(const json& j, const char* key, const std::string& context) {
    const json& v = require(j, key, context);
    if (!v.is_number_integer()) missing(context + key);
    return v.get<std::int64_t>();
}

std::uint64_t require_uint(const json& j, const char* key, const std::string& context) {
    const json& v = require(j, key, context);
    if (!v.is_number_unsigned() && !v.is_number_integer()) missing(context + key);
    return v.get<std::uint64_t>();
}

bool require_bool(const json& j, const char* key, const std::string& context) {
    const json& v = require(j, key, context);
    if (!v.is_boolean()) missing(context + key);
    return v.get<bool>();
}

std::string require_string(const json& j, const char* key, const std::string& context) {
    const json& v = require(j, key, context);
    if (!v.is_string()) missing(context + key);
    return v.get<std::string>();
}

const json& require_array(const json& j, const char* key, const std::string& context) {
    const json& v = require(j, key, context);
    if (!v.is_array()) missing(context + key);
    return v;
}

std::vector<double> require_doubles(const json& j, const char* key, const std::string& context) {
    const json& arr = require_array(j, key, context);
    std::vector<double> out;
    out.reserve(arr.size());
    for (const auto& v : arr) {
        if (!v.is_number()) missing(context + key);
        out.push_back(v.get<double>());
    }
    return out;
}

std::vector<std::string> require_strings(const json& j, const char* key,
                                         const std::string& context) {
    const json& arr = require_array(j, key, context);
    std::vector<std::string> out;
    out.reserve(arr.size());
    for (const auto& v : arr) {
        if (!v.is_string()) missing(context + key);
        out.push_back(v.get<std::string>());
    }
    return out;
}

// Child indices must point past the parent and every path must end at a
// leaf; rejects cycles and out-of-range references in one pass.
template <typename Node>
void check_node_links(const std::vector<Node>& nodes, const std::string& context) {
    if (nodes.empty()) missing(context + "nodes");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const Node& node = nodes[i];
        if (node.is_leaf) continue;
        const auto size = static_cast<std::int32_t>(nodes.size());
        if (node.left <= static_cast<std::int32_t>(i) || node.left >= size ||
            node.right <= static_cast<std::int32_t>(i) || node.right >= size) {
            missing(context + "nodes[" + std::to_string(i) + "]");
        }
    }
}

}  // namespace

ordered_json tree_to_json(const DecisionTree& tree) {
    ordered_json j;
    j["n_classes"] = tree.n_classes;
    ordered_json nodes = ordered_json::array();
    for (const auto& node : tree.nodes) {
        ordered_json n;
        if (node.is_leaf) {
            n["kind"] = "leaf";
            n["counts"] = node.class_counts;
        } else {
            n["kind"] = "split";
            n["feature"] = node.feature;
            n["threshold"] = node.threshold;
            n["left"] = node.left;
            n["right"] = node.right;
        }
        nodes.push_back(std::move(n));
    }
    j["nodes"] = std::move(nodes);
    return j;
}

DecisionTree tree_from_json(const json& j, const std::string& context) {
    DecisionTree tree;
    tree.n_classes = static_cast<int>(require_int(j, "n_classes", context));
    const json& nodes = require_array(j, "nodes", context);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const std::string node_context = context + "nodes[" + std::to_string(i) + "].";
        const json& n = nodes[i];
        TreeNode node;
        const std::string kind = require_string(n, "kind", node_context);
        if (kind == "leaf") {
            node.is_leaf = true;
            const json& counts = require_array(n, "counts", node_context);
            for (const auto& c : counts) {
                if (!c.is_number_integer()) missing(node_context + "counts");
                node.class_counts.push_back(c.get<std::int64_t>());
            }
            if (node.class_counts.size() != static_cast<std::size_t>(tree.n_classes)) {
                missing(node_context + "counts");
            }
        } else if (kind == "split") {
            node.is_leaf = false;
            node.feature = static_cast<std::size_t>(require_int(n, "feature", node_context));
            node.threshold = require_double(n, "threshold", node_context);
            node.left = static_cast<std::int32_t>(require_int(n, "left", node_context));
            node.right = static_cast<std::int32_t>(require_int(n, "right", node_context));
        } else {
            missing(node_context + "kind");
        }
        tree.nodes.push_back(std::move(node));
    }
    check_node_links(tree.nodes, context);
    return tree;
}

namespace {

ordered_json tree_config_to_json(const TreeConfig& c) {
    ordered_json j;
    j["max_depth"] = c.max_depth;
    j["min_samples_split"] = c.min_samples_split;
    j["min_gain"] = c.min_gain;
    return j;
}

TreeConfig tree_config_from_json(const json& j, const std::string& context) {
    TreeConfig c;
    c.max_depth = static_cast<std::size_t>(require_int(j, "max_depth", context));
    c.min_samples_split = static_cast<std::size_t>(require_int(j, "min_samples_split", context));
    c.min_gain = require_double(j, "min_gain", context);
    return c;
}

ordered_json forest_config_to_json(const ForestConfig& c) {
    ordered_json j;
    j["n_trees"] = c.n_trees;
    if (c.max_features) {
        j["max_features"] = *c.max_features;
    } else {
        j["max_features"] = "sqrt";
    }
    j["bootstrap"] = c.bootstrap;
    j["tree"] = tree_config_to_json(c.tree);
    j["seed"] = c.seed;
    return j;
}

ForestConfig forest_config_from_json(const json& j, const std::string& context) {
    ForestConfig c;
    c.n_trees = static_cast<std::size_t>(require_int(j, "n_trees", context));
    const json& mf = require(j, "max_features", context);
    if (mf.is_string() && mf.get<std::string>() == "sqrt") {
        c.max_features.reset();
    } else if (mf.is_number_integer()) {
        c.max_features = mf.get<std::size_t>();
    } else {
        missing(context + std::string("max_features"));
    }
    c.bootstrap = require_bool(j, "bootstrap", context);
    c.tree = tree_config_from_json(require(j, "tree", context), context + "tree.");
    c.seed = require_uint(j, "seed", context);
    return c;
}

ordered_json boost_config_to_json(const BoostConfig& c) {
    ordered_json j;
    j["n_rounds"] = c.n_rounds;
    j["eta"] = c.eta;
    j["lambda"] = c.lambda;
    j["gamma"] = c.gamma;
    j["max_depth"] = c.max_depth;
    return j;
}

BoostConfig boost_config_from_json(const json& j, const std::string& context) {
    BoostConfig c;
    c.n_rounds = static_cast<std::size_t>(require_int(j, "n_rounds", context));
    c.eta = require_double(j, "eta", context);
    c.lambda = require_double(j, "lambda", context);
    c.gamma = require_double(j, "gamma", context);
    c.max_depth = static_cast<std::size_t>(require_int(j, "max_depth", context));
    return c;
}

}  // namespace

ordered_json forest_to_json(const Forest& forest) {
    ordered_json j;
    j["config"] = forest_config_to_json(forest.config);
    j["n_classes"] = forest.n_classes;
    ordered_json trees = ordered_json::array();
    for (std::size_t i = 0; i < forest.trees.size(); ++i) {
        ordered_json entry;
        entry["features"] = forest.feature_subsets[i];
        entry["tree"] = tree_to_json(forest.trees[i]);
        trees.push_back(std::move(entry));
    }
    j["trees"] = std::move(trees);
    return j;
}

Forest forest_from_json(const json& j, const std::string& context) {
    Forest forest;
    forest.config = forest_config_from_json(require(j, "config", context), context + "config.");
    forest.n_classes = static_cast<int>(require_int(j, "n_classes", context));
    const json& trees = require_array(j, "trees", context);
    for (std::size_t i = 0; i < trees.size(); ++i) {
        const std::string entry_context = context + "trees[" + std::to_string(i) + "].";
        const json& entry = trees[i];
        const json& features = require_array(entry, "features", entry_context);
        std::vector<std::size_t> subset;
        for (const auto& f : features) {
            if (!f.is_number_integer()) missing(entry_context + "features");
            subset.push_back(f.get<std::size_t>());
        }
        forest.feature_subsets.push_back(std::move(subset));
        forest.trees.push_back(
            tree_from_json(require(entry, "tree", entry_context), entry_context + "tree."));
    }
    if (forest.trees.empty()) missing(context + std::string("trees"));
    return forest;
}

ordered_json boost_to_json(const BoostedModel& model) {
    ordered_json j;
    j["config"] = boost_config_to_json(model.config);
    j["n_classes"] = model.n_classes;
    j["base_score"] = model.base_score;
    ordered_json per_class = ordered_json::array();
    for (const auto& class_trees : model.trees) {
        ordered_json rounds = ordered_json::array();
        for (const auto& tree : class_trees) {
            ordered_json nodes = ordered_json::array();
            for (const auto& node : tree.nodes) {
                ordered_json n;
                if (node.is_leaf) {
                    n["kind"] = "leaf";
                    n["weight"] = node.weight;
                } else {
                    n["kind"] = "split";
                    n["feature"] = node.feature;
                    n["threshold"] = node.threshold;
                    n["left"] = node.left;
                    n["right"] = node.right;
                }
                nodes.push_back(std::move(n));
            }
            ordered_json t;
            t["nodes"] = std::move(nodes);
            rounds.push_back(std::move(t));
        }
        per_class.push_back(std::move(rounds));
    }
    j["trees"] = std::move(per_class);
    return j;
}

BoostedModel boost_from_json(const json& j, const std::string& context) {
    BoostedModel model;
    model.config = boost_config_from_json(require(j, "config", context), context + "config.");
    model.n_classes = static_cast<int>(require_int(j, "n_classes", context));
    model.base_score = require_double(j, "base_score", context);
    const json& per_class = require_array(j, "trees", context);
    if (per_class.size() != static_cast<std::size_t>(model.n_classes)) {
        missing(context + std::string("trees"));
    }
    std::size_t rounds_seen = 0;
    for (std::size_t k = 0; k < per_class.size(); ++k) {
        const json& rounds = per_class[k];
        if (!rounds.is_array()) missing(context + "trees[" + std::to_string(k) + "]");
        if (k == 0) {
            rounds_seen = rounds.size();
        } else if (rounds.size() != rounds_seen) {
            missing(context + "trees[" + std::to_string(k) + "]");
        }
        std::vector<RegressionTree> class_trees;
        for (std::size_t r = 0; r < rounds.size(); ++r) {
            const std::string tree_context =
                context + "trees[" + std::to_string(k) + "][" + std::to_string(r) + "].";
            const json& nodes = require_array(rounds[r], "nodes", tree_context);
            RegressionTree tree;
            for (std::size_t i = 0; i < nodes.size(); ++i) {
                const std::string node_context = tree_context + "nodes[" + std::to_string(i) + "].";
                const json& n = nodes[i];
                RegressionNode node;
                const std::string kind = require_string(n, "kind", node_context);
                if (kind == "leaf") {
                    node.is_leaf = true;
                    node.weight = require_double(n, "weight", node_context);
                } else if (kind == "split") {
                    node.is_leaf = false;
                    node.feature =
                        static_cast<std::size_t>(require_int(n, "feature", node_context));
                    node.threshold = require_double(n, "threshold", node_context);
                    node.left = static_cast<std::int32_t>(require_int(n, "left", node_context));
                    node.right = static_cast<std::int32_t>(require_int(n, "right", node_context));
                } else {
                    missing(node_context + "kind");
                }
                tree.nodes.push_back(node);
            }
            check_node_links(tree.nodes, tree_context);
            class_trees.push_back(std::move(tree));
        }
        model.trees.push_back(std::move(class_trees));
    }
    return model;
}

namespace {

ordered_json stack_config_to_json(const StackConfig& c) {
    ordered_json j;
    j["mode"] = c.mode == StackMode::paper ? "paper" : "oof";
    j["k_folds"] = c.k_folds;
    j["meta_input"] = c.meta_input == MetaInput::augmented ? "augmented" : "predictions_only";
    j["seed"] = c.seed;
    const auto layer_to_json = [](const LayerConfig& layer) {
        ordered_json l;
        l["tree"] = tree_config_to_json(layer.tree);
        l["forest"] = forest_config_to_json(layer.forest);
        l["boost"] = boost_config_to_json(layer.boost);
        return l;
    };
    j["layer1"] = layer_to_json(c.layer1);
    j["layer2"] = layer_to_json(c.layer2);
    return j;
}

StackConfig stack_config_from_json(const json& j, const std::string& context) {
    StackConfig c;
    const std::string mode = require_string(j, "mode", context);
    if (mode == "paper") {
        c.mode = StackMode::paper;
    } else if (mode == "oof") {
        c.mode = StackMode::oof;
    } else {
        missing(context + std::string("mode"));
    }
    c.k_folds = static_cast<std::size_t>(require_int(j, "k_folds", context));
    const std::string meta = require_string(j, "meta_input", context);
    if (meta == "augmented") {
        c.meta_input = MetaInput::augmented;
    } else if (meta == "predictions_only") {
        c.meta_input = MetaInput::predictions_only;
    } else {
        missing(context + std::string("meta_input"));
    }
    c.seed = require_uint(j, "seed", context);
    const auto layer_from_json = [&](const char* key) {
        const std::string layer_context = context + key + std::string(".");
        const json& l = require(j, key, context);
        LayerConfig layer;
        layer.tree = tree_config_from_json(require(l, "tree", layer_context),
                                           layer_context + "tree.");
        layer.forest = forest_config_from_json(require(l, "forest", layer_context),
                                               layer_context + "forest.");
        layer.boost = boost_config_from_json(require(l, "boost", layer_context),
                                             layer_context + "boost.");
        return layer;
    };
    c.layer1 = layer_from_json("layer1");
    c.layer2 = layer_from_json("layer2");
    return c;
}

}  // namespace

ordered_json model_to_json(const StackedModel& model, const ModelMetadata& metadata) {
    ordered_json j;
    j["format_version"] = kModelFormatVersion;
    ordered_json schema;
    schema["feature_names"] = model.schema.feature_names;
    schema["units"] = model.schema.units;
    schema["class_names"] = model.schema.class_names;
    j["schema"] = std::move(schema);
    ordered_json scaler;
    scaler["means"] = model.scaler.means;
    scaler["stds"] = model.scaler.stds;
    j["scaler"] = std::move(scaler);
    j["stack_config"] = stack_config_to_json(model.config);
    j["meta_arity"] = model.meta_arity;
    ordered_json layer1;
    layer1["tree"] = tree_to_json(model.l1_tree);
    layer1["forest"] = forest_to_json(model.l1_forest);
    layer1["boost"] = boost_to_json(model.l1_boost);
    j["layer1"] = std::move(layer1);
    ordered_json layer2;
    layer2["tree"] = tree_to_json(model.l2_tree);
    layer2["forest"] = forest_to_json(model.l2_forest);
    layer2["boost"] = boost_to_json(model.l2_boost);
    j["layer2"] = std::move(layer2);
    ordered_json meta;
    meta["seed"] = metadata.seed;
    meta["data_fingerprint"] = metadata.data_fingerprint;
    j["metadata"] = std::move(meta);
    return j;
}

void save_model(const StackedModel& model, const std::filesystem::path& path,
                const ModelMetadata& metadata) {
    write_file_atomic(path, model_to_json(model, metadata).dump(2) + "\n");
}

LoadedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ModelIoError("cannot open model file: " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ModelIoError("model file: invalid JSON: " + std::string(e.what()));
    }
    if (!j.is_object()) throw ModelIoError("model file: top-level value must be an object");

    const auto version = require_int(j, "format_version", "");
    if (version != kModelFormatVersion) {
        throw ModelIoError("model file: unsupported format_version " + std::to_string(version) +
                           " (this build reads version " + std::to_string(kModelFormatVersion) +
                           ")");
    }

    LoadedModel loaded;
    StackedModel& model = loaded.model;

    const json& schema = require(j, "schema", "");
    model.schema.feature_names = require_strings(schema, "feature_names", "schema.");
    model.schema.units = require_strings(schema, "units", "schema.");
    model.schema.class_names = require_strings(schema, "class_names", "schema.");
    if (model.schema.arity() != 4) {
        throw ModelIoError("model file: schema arity must be 4");
    }

    const json& scaler = require(j, "scaler", "");
    model.scaler.means = require_doubles(scaler, "means", "scaler.");
    model.scaler.stds = require_doubles(scaler, "stds", "scaler.");
    if (model.scaler.means.size() != model.schema.arity() ||
        model.scaler.stds.size() != model.schema.arity()) {
        throw ModelIoError("model file: scaler length does not match schema arity");
    }

    model.config = stack_config_from_json(require(j, "stack_config", ""), "stack_config.");
    model.meta_arity = static_cast<std::size_t>(require_int(j, "meta_arity", ""));

    const json& layer1 = require(j, "layer1", "");
    model.l1_tree = tree_from_json(require(layer1, "tree", "layer1."), "layer1.tree.");
    model.l1_forest = forest_from_json(require(layer1, "forest", "layer1."), "layer1.forest.");
    model.l1_boost = boost_from_json(require(layer1, "boost", "layer1."), "layer1.boost.");
    const json& layer2 = require(j, "layer2", "");
    model.l2_tree = tree_from_json(require(layer2, "tree", "layer2."), "layer2.tree.");
    model.l2_forest = forest_from_json(require(layer2, "forest", "layer2."), "layer2.forest.");
    model.l2_boost = boost_from_json(require(layer2, "boost", "layer2."), "layer2.boost.");

    const std::size_t expected_meta =
        (model.config.meta_input == MetaInput::augmented ? model.schema.arity() : 0) +
        3 * static_cast<std::size_t>(model.schema.n_classes());
    if (model.meta_arity != expected_meta) {
        throw ModelIoError("model file: meta_arity is inconsistent with meta_input");
    }

    const json& metadata = require(j, "metadata", "");
    loaded.metadata.seed = require_uint(metadata, "seed", "metadata.");
    loaded.metadata.data_fingerprint = require_string(metadata, "data_fingerprint", "metadata.");
    return loaded;
}

}  // namespace posture
