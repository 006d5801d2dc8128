#include "posture/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "posture/error.hpp"

namespace posture {

std::int64_t ConfusionMatrix::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

ConfusionMatrix confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred,
                                 int n_classes) {
    if (y_true.size() != y_pred.size()) {
        throw DomainError("true/predicted label vectors differ in length");
    }
    if (y_true.empty()) throw DomainError("cannot build a confusion matrix from zero rows");
    ConfusionMatrix cm(n_classes);
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] < 0 || y_true[i] >= n_classes || y_pred[i] < 0 || y_pred[i] >= n_classes) {
            throw DomainError("class id out of range at position " + std::to_string(i));
        }
        cm.at(y_true[i], y_pred[i]) += 1;
    }
    return cm;
}

MetricSet metric_set(const ConfusionMatrix& cm) {
    const std::int64_t total = cm.total();
    if (cm.n_classes <= 0 || total <= 0) {
        throw DomainError("metrics require a non-empty confusion matrix");
    }

    std::int64_t trace = 0;
    double precision_sum = 0.0, recall_sum = 0.0, f1_sum = 0.0;
    for (int c = 0; c < cm.n_classes; ++c) {
        trace += cm.at(c, c);
        std::int64_t col_sum = 0, row_sum = 0;
        for (int k = 0; k < cm.n_classes; ++k) {
            col_sum += cm.at(k, c);
            row_sum += cm.at(c, k);
        }
        const double diag = static_cast<double>(cm.at(c, c));
        const double precision = col_sum > 0 ? diag / static_cast<double>(col_sum) : 0.0;
        const double recall = row_sum > 0 ? diag / static_cast<double>(row_sum) : 0.0;
        const double f1 =
            precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
        precision_sum += precision;
        recall_sum += recall;
        f1_sum += f1;
    }

    MetricSet m;
    const double k = static_cast<double>(cm.n_classes);
    m.accuracy = static_cast<double>(trace) / static_cast<double>(total);
    m.macro_precision = precision_sum / k;
    m.macro_recall = recall_sum / k;
    m.macro_f1 = f1_sum / k;
    return m;
}

std::string format_percent(double value01) {
    const long long scaled = std::llround(value01 * 10000.0);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%lld.%02lld%%", scaled / 100, scaled % 100);
    return std::string(buf);
}

namespace {

using ordered_json = nlohmann::ordered_json;

double round6(double v) {
    return static_cast<double>(std::llround(v * 1e6)) / 1e6;
}

ordered_json cell_to_json(const EvaluationCell& cell) {
    ordered_json j;
    j["accuracy"] = round6(cell.metrics.accuracy);
    j["macro_precision"] = round6(cell.metrics.macro_precision);
    j["macro_recall"] = round6(cell.metrics.macro_recall);
    j["macro_f1"] = round6(cell.metrics.macro_f1);
    ordered_json confusion = ordered_json::array();
    for (int t = 0; t < cell.confusion.n_classes; ++t) {
        ordered_json row = ordered_json::array();
        for (int p = 0; p < cell.confusion.n_classes; ++p) row.push_back(cell.confusion.at(t, p));
        confusion.push_back(std::move(row));
    }
    j["confusion"] = std::move(confusion);
    return j;
}

std::string render_json(const MetricsReport& report) {
    ordered_json j;
    ordered_json prov;
    prov["n_total"] = report.provenance.n_total;
    prov["n_train"] = report.provenance.n_train;
    prov["n_test"] = report.provenance.n_test;
    prov["seed"] = report.provenance.seed;
    prov["test_fraction"] = round6(report.provenance.test_fraction);
    prov["mode"] = report.provenance.mode;
    prov["data_fingerprint"] = report.provenance.data_fingerprint;
    j["provenance"] = std::move(prov);

    ordered_json layers;
    for (int layer = 1; layer <= 2; ++layer) {
        ordered_json per_algo;
        for (std::size_t a = 0; a < kAlgorithmKeys.size(); ++a) {
            per_algo[kAlgorithmKeys[a]] =
                cell_to_json(report.cell(layer, static_cast<Algorithm>(a)));
        }
        layers[std::to_string(layer)] = std::move(per_algo);
    }
    j["layers"] = std::move(layers);

    if (report.correlation) {
        ordered_json corr;
        corr["labels"] = report.correlation->labels;
        ordered_json values = ordered_json::array();
        for (double v : report.correlation->values.values) values.push_back(round6(v));
        corr["values"] = std::move(values);  // row-major
        j["correlation"] = std::move(corr);
    }
    return j.dump(2) + "\n";
}

std::string render_table(const MetricsReport& report) {
    constexpr std::array<const char*, 5> header = {"Algorithm", "Accuracy", "Precision", "F1",
                                                   "Recall"};
    std::size_t name_width = std::string(header[0]).size();
    for (const char* name : kAlgorithmNames) name_width = std::max(name_width, std::string(name).size());

    std::ostringstream out;
    for (int layer = 1; layer <= 2; ++layer) {
        out << "Layer " << layer << "\n";
        out << header[0] << std::string(name_width - std::string(header[0]).size() + 2, ' ');
        for (std::size_t c = 1; c < header.size(); ++c) {
            out << header[c] << std::string(11 - std::string(header[c]).size(), ' ');
        }
        out << "\n";
        for (std::size_t a = 0; a < kAlgorithmNames.size(); ++a) {
            const auto& m = report.cell(layer, static_cast<Algorithm>(a)).metrics;
            out << kAlgorithmNames[a]
                << std::string(name_width - std::string(kAlgorithmNames[a]).size() + 2, ' ');
            for (double v : {m.accuracy, m.macro_precision, m.macro_f1, m.macro_recall}) {
                const std::string cell = format_percent(v);
                out << cell << std::string(11 - cell.size(), ' ');
            }
            out << "\n";
        }
        if (layer == 1) out << "\n";
    }
    return out.str();
}

}  // namespace

std::string render_report(const MetricsReport& report, ReportFormat format) {
    return format == ReportFormat::json ? render_json(report) : render_table(report);
}

}  // namespace posture
