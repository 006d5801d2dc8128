#include "posture/cli.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"
#include "posture/error.hpp"
#include "posture/model_io.hpp"
#include "posture/stack.hpp"

namespace posture {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

int exit_code_for(const Error& e) {
    if (dynamic_cast<const TrainError*>(&e)) return kExitInternal;
    return kExitUsage;
}

template <typename Fn>
int run_guarded(std::ostream& err, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}

SynthParams synth_params_from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open synthesis parameter file: " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw DataError("synthesis parameter file: invalid JSON: " + std::string(e.what()));
    }
    SynthParams params = SynthParams::separated();
    const auto read_grid = [&](const char* key, std::vector<std::vector<double>>& dest) {
        if (!j.contains(key)) return;
        dest = j.at(key).get<std::vector<std::vector<double>>>();
    };
    try {
        read_grid("means", params.means);
        read_grid("stds", params.stds);
        if (j.contains("clamp_lo")) params.clamp_lo = j.at("clamp_lo").get<std::vector<double>>();
        if (j.contains("clamp_hi")) params.clamp_hi = j.at("clamp_hi").get<std::vector<double>>();
        if (j.contains("seed")) params.seed = j.at("seed").get<std::uint64_t>();
    } catch (const json::exception& e) {
        throw DataError("synthesis parameter file: " + std::string(e.what()));
    }
    return params;
}

StackMode parse_mode(const std::string& mode) {
    if (mode == "paper") return StackMode::paper;
    if (mode == "oof") return StackMode::oof;
    throw ConfigError("unknown mode '" + mode + "' (expected 'paper' or 'oof')");
}

MetaInput parse_meta_input(const std::string& meta) {
    if (meta == "augmented") return MetaInput::augmented;
    if (meta == "predictions_only") return MetaInput::predictions_only;
    throw ConfigError("unknown meta input '" + meta +
                      "' (expected 'augmented' or 'predictions_only')");
}

}  // namespace

int cmd_generate(const GenerateOptions& options, std::ostream& out, std::ostream& err) {
    return run_guarded(err, [&] {
        SynthParams params;
        if (options.params_file) {
            params = synth_params_from_file(*options.params_file);
            if (options.seed_given) params.seed = options.seed;
        } else if (options.preset == "separated") {
            params = SynthParams::separated();
            params.seed = options.seed;
        } else if (options.preset == "noisy") {
            params = SynthParams::noisy();
            params.seed = options.seed;
        } else {
            throw ConfigError("unknown preset '" + options.preset +
                              "' (expected 'separated' or 'noisy')");
        }

        const Dataset data = generate(params, options.n);
        save_csv(data, options.out);

        std::vector<std::size_t> per_class(data.schema.class_names.size(), 0);
        for (int label : data.labels) per_class[static_cast<std::size_t>(label)] += 1;
        out << "wrote " << data.size() << " rows to " << options.out.string() << " (";
        for (std::size_t c = 0; c < per_class.size(); ++c) {
            if (c) out << ", ";
            out << per_class[c] << " " << data.schema.class_names[c];
        }
        out << ")\n";
        return kExitOk;
    });
}

int cmd_train(const TrainOptions& options, std::ostream& out, std::ostream& err) {
    return run_guarded(err, [&] {
        const Dataset data = load_csv(options.data);
        const CorrelationMatrix correlation = correlation_matrix(data);

        const auto [train, test] = split(data, options.test_fraction, options.seed);
        if (options.train_out) save_csv(train, *options.train_out);
        if (options.test_out) save_csv(test, *options.test_out);

        StackConfig config;
        config.mode = parse_mode(options.mode);
        config.k_folds = options.k_folds;
        config.meta_input = parse_meta_input(options.meta_input);
        config.seed = options.seed;

        StackedModel model;
        try {
            model = fit_stack(train, config);
        } catch (const DataError& e) {
            throw;
        } catch (const ConfigError& e) {
            throw;
        } catch (const Error& e) {
            throw TrainError(std::string("training failed: ") + e.what());
        }

        MetricsReport report = evaluate_stack(model, test);
        report.provenance.n_total = data.size();
        report.provenance.n_train = train.size();
        report.provenance.n_test = test.size();
        report.provenance.seed = options.seed;
        report.provenance.test_fraction = options.test_fraction;
        report.provenance.data_fingerprint = data_fingerprint(data);
        report.correlation = correlation;

        ModelMetadata metadata;
        metadata.seed = options.seed;
        metadata.data_fingerprint = report.provenance.data_fingerprint;
        save_model(model, options.model_out, metadata);
        write_file_atomic(options.report_out, render_report(report, ReportFormat::json));

        out << "train " << train.size() << " rows, test " << test.size() << " rows, mode "
            << options.mode << "\n\n";
        out << "Correlation (full dataset)\n" << correlation_to_text(correlation) << "\n";
        out << render_report(report, ReportFormat::table);
        return kExitOk;
    });
}

int cmd_evaluate(const EvaluateOptions& options, std::ostream& out, std::ostream& err) {
    return run_guarded(err, [&] {
        const LoadedModel loaded = load_model(options.model);
        const Dataset data = load_csv(options.data, loaded.model.schema);

        MetricsReport report = evaluate_stack(loaded.model, data);
        report.provenance.n_total = data.size();
        report.provenance.n_train = 0;
        report.provenance.n_test = data.size();
        report.provenance.seed = loaded.metadata.seed;
        report.provenance.test_fraction = 0.0;
        report.provenance.data_fingerprint = data_fingerprint(data);

        write_file_atomic(options.report_out, render_report(report, ReportFormat::json));
        out << render_report(report, ReportFormat::table);
        return kExitOk;
    });
}

int cmd_predict(const PredictOptions& options, std::ostream& out, std::ostream& err) {
    return run_guarded(err, [&] {
        const std::array<double, 4> row = {options.egg, options.heart_rate,
                                           options.respiration_rate, options.spo2};
        for (double v : row) {
            if (!std::isfinite(v)) throw PredictError("feature flags must be finite numbers");
        }

        const LoadedModel loaded = load_model(options.model);
        const LayeredPredictions preds = predict_stack(loaded.model, row);

        const auto& classes = loaded.model.schema.class_names;
        ordered_json j;
        for (int layer = 1; layer <= 2; ++layer) {
            ordered_json per_algo;
            const auto& ids = layer == 1 ? preds.layer1 : preds.layer2;
            for (std::size_t a = 0; a < kAlgorithmKeys.size(); ++a) {
                per_algo[kAlgorithmKeys[a]] = classes[static_cast<std::size_t>(ids[a])];
            }
            j[std::string("layer") + std::to_string(layer)] = std::move(per_algo);
        }
        out << j.dump(2) << "\n";
        return kExitOk;
    });
}

}  // namespace posture
