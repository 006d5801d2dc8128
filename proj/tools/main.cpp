#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "posture/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Resting-position classification: synthesize data, train and evaluate the "
                 "2-layer stacked ensemble, and predict single rows."};
    app.require_subcommand(1);

    posture::GenerateOptions generate_options;
    auto* generate = app.add_subcommand("generate", "Write a synthetic physiological dataset CSV");
    generate->add_option("--n", generate_options.n, "Number of rows (divisible by 3)")
        ->capture_default_str();
    auto* generate_seed = generate->add_option("--seed", generate_options.seed, "Generator seed")
                              ->capture_default_str();
    generate->add_option("--preset", generate_options.preset, "Synthesis preset: separated|noisy")
        ->capture_default_str();
    generate->add_option("--params", generate_options.params_file,
                         "JSON file with synthesis parameter overrides");
    generate->add_option("--out", generate_options.out, "Output CSV path")->required();

    posture::TrainOptions train_options;
    auto* train = app.add_subcommand("train", "Split, scale, fit the stacked ensemble, evaluate");
    train->add_option("--data", train_options.data, "Input CSV")->required();
    train->add_option("--mode", train_options.mode, "Stacking mode: oof|paper")
        ->capture_default_str();
    auto* reproduce = train->add_flag("--reproduce-paper",
                                      "Shorthand for --mode paper (in-sample stacking protocol)");
    train->add_option("--seed", train_options.seed, "Split and training seed")
        ->capture_default_str();
    train->add_option("--test-fraction", train_options.test_fraction, "Held-out fraction in [0,1)")
        ->capture_default_str();
    train->add_option("--k-folds", train_options.k_folds, "Folds for oof meta features")
        ->capture_default_str();
    train->add_option("--meta-input", train_options.meta_input,
                      "Meta features: augmented|predictions_only")
        ->capture_default_str();
    train->add_option("--model-out", train_options.model_out, "Model JSON path")->required();
    train->add_option("--report-out", train_options.report_out, "Report JSON path")->required();
    train->add_option("--train-out", train_options.train_out, "Optional CSV echo of the train split");
    train->add_option("--test-out", train_options.test_out, "Optional CSV echo of the test split");

    posture::EvaluateOptions evaluate_options;
    auto* evaluate = app.add_subcommand("evaluate", "Evaluate a saved model on a CSV");
    evaluate->add_option("--model", evaluate_options.model, "Model JSON path")->required();
    evaluate->add_option("--data", evaluate_options.data, "Input CSV")->required();
    evaluate->add_option("--report-out", evaluate_options.report_out, "Report JSON path")
        ->required();

    posture::PredictOptions predict_options;
    auto* predict = app.add_subcommand("predict", "Predict one row with a saved model");
    predict->add_option("--model", predict_options.model, "Model JSON path")->required();
    predict->add_option("--egg", predict_options.egg, "EGG scalar")->required();
    predict->add_option("--heart-rate", predict_options.heart_rate, "Heart rate (beats/min)")
        ->required();
    predict
        ->add_option("--respiration-rate", predict_options.respiration_rate,
                     "Respiration rate (breaths/min)")
        ->required();
    predict->add_option("--spo2", predict_options.spo2, "Oxygen saturation (percent)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e);
        return posture::kExitOk;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return posture::kExitUsage;
    }

    generate_options.seed_given = generate_seed->count() > 0;
    if (reproduce->count() > 0) train_options.mode = "paper";

    if (generate->parsed()) {
        return posture::cmd_generate(generate_options, std::cout, std::cerr);
    }
    if (train->parsed()) {
        return posture::cmd_train(train_options, std::cout, std::cerr);
    }
    if (evaluate->parsed()) {
        return posture::cmd_evaluate(evaluate_options, std::cout, std::cerr);
    }
    return posture::cmd_predict(predict_options, std::cout, std::cerr);
}
