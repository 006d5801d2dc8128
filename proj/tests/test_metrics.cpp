#include <algorithm>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "posture/error.hpp"
#include "posture/metrics.hpp"
#include "posture/rng.hpp"

using namespace posture;

namespace {

// Direct per-class recomputation from raw label vectors; the oracle the
// confusion-matrix path must agree with.
MetricSet brute_force_metrics(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                              int k) {
    MetricSet m;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] == y_pred[i]) ++hits;
    }
    m.accuracy = static_cast<double>(hits) / static_cast<double>(y_true.size());
    for (int c = 0; c < k; ++c) {
        std::size_t tp = 0, predicted = 0, actual = 0;
        for (std::size_t i = 0; i < y_true.size(); ++i) {
            if (y_pred[i] == c) ++predicted;
            if (y_true[i] == c) ++actual;
            if (y_pred[i] == c && y_true[i] == c) ++tp;
        }
        const double p = predicted > 0 ? static_cast<double>(tp) / predicted : 0.0;
        const double r = actual > 0 ? static_cast<double>(tp) / actual : 0.0;
        const double f1 = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
        m.macro_precision += p / k;
        m.macro_recall += r / k;
        m.macro_f1 += f1 / k;
    }
    return m;
}

MetricsReport uniform_report(double value) {
    MetricsReport report;
    for (int layer = 1; layer <= 2; ++layer) {
        for (std::size_t a = 0; a < 3; ++a) {
            auto& cell = report.cell(layer, static_cast<Algorithm>(a));
            cell.metrics = {value, value, value, value};
            cell.confusion = ConfusionMatrix(3);
            cell.confusion.at(0, 0) = 1;
        }
    }
    report.provenance.mode = "paper";
    return report;
}

}  // namespace

TEST_CASE("confusion_matrix tallies the worked example") {
    const std::vector<int> y_true = {0, 1, 2, 2};
    const std::vector<int> y_pred = {0, 2, 2, 2};
    const ConfusionMatrix cm = confusion_matrix(y_true, y_pred, 3);
    CHECK(cm.at(0, 0) == 1);
    CHECK(cm.at(1, 2) == 1);
    CHECK(cm.at(2, 2) == 2);
    CHECK(cm.total() == 4);

    const ConfusionMatrix diagonal = confusion_matrix(y_true, y_true, 3);
    for (int t = 0; t < 3; ++t) {
        for (int p = 0; p < 3; ++p) {
            if (t != p) CHECK(diagonal.at(t, p) == 0);
        }
    }

    const ConfusionMatrix lone = confusion_matrix(std::vector<int>{1}, std::vector<int>{0}, 3);
    CHECK(lone.at(1, 0) == 1);
    CHECK(lone.total() == 1);
}

TEST_CASE("confusion_matrix rejects malformed input") {
    CHECK_THROWS_AS(confusion_matrix(std::vector<int>{0, 1}, std::vector<int>{0}, 3), DomainError);
    CHECK_THROWS_AS(confusion_matrix(std::vector<int>{3}, std::vector<int>{0}, 3), DomainError);
    CHECK_THROWS_AS(confusion_matrix(std::vector<int>{}, std::vector<int>{}, 3), DomainError);
}

TEST_CASE("metric_set worked examples") {
    SUBCASE("29 of 36 on the diagonal") {
        ConfusionMatrix cm(3);
        cm.at(0, 0) = 10;
        cm.at(1, 1) = 10;
        cm.at(2, 2) = 9;
        cm.at(0, 1) = 3;
        cm.at(1, 2) = 2;
        cm.at(2, 0) = 2;
        const MetricSet m = metric_set(cm);
        CHECK(m.accuracy == doctest::Approx(29.0 / 36.0).epsilon(1e-15));
        CHECK(format_percent(m.accuracy) == "80.56%");
    }
    SUBCASE("hand-tallied mixed matrix") {
        ConfusionMatrix cm(3);
        cm.at(0, 0) = 1;
        cm.at(1, 2) = 1;
        cm.at(2, 2) = 2;
        const MetricSet m = metric_set(cm);
        CHECK(m.accuracy == doctest::Approx(0.75));
        CHECK(m.macro_precision == doctest::Approx(5.0 / 9.0).epsilon(1e-12));
        CHECK(m.macro_recall == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
        CHECK(m.macro_f1 == doctest::Approx(0.6).epsilon(1e-12));
    }
    SUBCASE("perfect diagonal") {
        ConfusionMatrix cm(3);
        for (int c = 0; c < 3; ++c) cm.at(c, c) = 12;
        const MetricSet m = metric_set(cm);
        CHECK(m.accuracy == 1.0);
        CHECK(m.macro_precision == 1.0);
        CHECK(m.macro_recall == 1.0);
        CHECK(m.macro_f1 == 1.0);
    }
    SUBCASE("empty matrix is rejected") {
        CHECK_THROWS_AS(metric_set(ConfusionMatrix(3)), DomainError);
    }
}

TEST_CASE("metrics agree with brute force on random label vectors") {
    Rng rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + rng.uniform_index(200);
        std::vector<int> y_true(n), y_pred(n);
        for (std::size_t i = 0; i < n; ++i) {
            y_true[i] = static_cast<int>(rng.uniform_index(3));
            y_pred[i] = static_cast<int>(rng.uniform_index(3));
        }
        const MetricSet expected = brute_force_metrics(y_true, y_pred, 3);
        const MetricSet actual = metric_set(confusion_matrix(y_true, y_pred, 3));
        CHECK(actual.accuracy == doctest::Approx(expected.accuracy).epsilon(1e-12));
        CHECK(actual.macro_precision == doctest::Approx(expected.macro_precision).epsilon(1e-12));
        CHECK(actual.macro_recall == doctest::Approx(expected.macro_recall).epsilon(1e-12));
        CHECK(actual.macro_f1 == doctest::Approx(expected.macro_f1).epsilon(1e-12));
    }
}

TEST_CASE("metrics are invariant under class relabeling") {
    Rng rng(404);
    const std::array<std::array<int, 3>, 6> permutations = {
        {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 5 + rng.uniform_index(100);
        std::vector<int> y_true(n), y_pred(n);
        for (std::size_t i = 0; i < n; ++i) {
            y_true[i] = static_cast<int>(rng.uniform_index(3));
            y_pred[i] = static_cast<int>(rng.uniform_index(3));
        }
        const MetricSet base = metric_set(confusion_matrix(y_true, y_pred, 3));
        for (const auto& perm : permutations) {
            std::vector<int> pt(n), pp(n);
            for (std::size_t i = 0; i < n; ++i) {
                pt[i] = perm[static_cast<std::size_t>(y_true[i])];
                pp[i] = perm[static_cast<std::size_t>(y_pred[i])];
            }
            const MetricSet permuted = metric_set(confusion_matrix(pt, pp, 3));
            CHECK(permuted.accuracy == doctest::Approx(base.accuracy).epsilon(1e-12));
            CHECK(permuted.macro_precision ==
                  doctest::Approx(base.macro_precision).epsilon(1e-12));
            CHECK(permuted.macro_recall == doctest::Approx(base.macro_recall).epsilon(1e-12));
            CHECK(permuted.macro_f1 == doctest::Approx(base.macro_f1).epsilon(1e-12));
        }
    }
}

TEST_CASE("per-class f1 lies between precision and recall") {
    Rng rng(55);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 10 + rng.uniform_index(100);
        std::vector<int> y_true(n), y_pred(n);
        for (std::size_t i = 0; i < n; ++i) {
            y_true[i] = static_cast<int>(rng.uniform_index(3));
            y_pred[i] = static_cast<int>(rng.uniform_index(3));
        }
        const ConfusionMatrix cm = confusion_matrix(y_true, y_pred, 3);
        for (int c = 0; c < 3; ++c) {
            std::int64_t col = 0, row = 0;
            for (int k = 0; k < 3; ++k) {
                col += cm.at(k, c);
                row += cm.at(c, k);
            }
            if (col == 0 || row == 0) continue;
            const double p = static_cast<double>(cm.at(c, c)) / static_cast<double>(col);
            const double r = static_cast<double>(cm.at(c, c)) / static_cast<double>(row);
            if (p <= 0.0 || r <= 0.0) continue;
            const double f1 = 2 * p * r / (p + r);
            CHECK(f1 >= std::min(p, r) - 1e-12);
            CHECK(f1 <= std::max(p, r) + 1e-12);
        }
    }
}

TEST_CASE("format_percent rounds half away from zero at 2 decimals") {
    CHECK(format_percent(29.0 / 36.0) == "80.56%");
    CHECK(format_percent(1.0) == "100.00%");
    CHECK(format_percent(0.0) == "0.00%");
    CHECK(format_percent(0.84444) == "84.44%");
    CHECK(format_percent(0.005) == "0.50%");
    CHECK(format_percent(0.12345) == "12.35%");  // half rounds up
}

TEST_CASE("table render shows 100.00% for a perfect grid") {
    const std::string table = render_report(uniform_report(1.0), ReportFormat::table);
    CHECK(table.find("Layer 1") != std::string::npos);
    CHECK(table.find("Layer 2") != std::string::npos);
    CHECK(table.find("Accuracy") != std::string::npos);
    // 6 rows x 4 metric cells.
    std::size_t occurrences = 0;
    for (std::size_t pos = table.find("100.00%"); pos != std::string::npos;
         pos = table.find("100.00%", pos + 1)) {
        ++occurrences;
    }
    CHECK(occurrences == 24);
}

TEST_CASE("json render is stable and 6-decimal fixed") {
    MetricsReport report = uniform_report(0.8055555555);
    report.provenance.n_total = 180;
    report.provenance.n_train = 144;
    report.provenance.n_test = 36;
    report.provenance.seed = 42;
    report.provenance.mode = "paper";
    const std::string a = render_report(report, ReportFormat::json);
    const std::string b = render_report(report, ReportFormat::json);
    CHECK(a == b);
    CHECK(a.find("0.805556") != std::string::npos);

    const auto parsed = nlohmann::json::parse(a);
    CHECK(parsed.at("provenance").at("n_train") == 144);
    CHECK(parsed.at("layers").at("1").at("tree").at("accuracy") == doctest::Approx(0.805556));
    CHECK(parsed.at("layers").at("2").at("boost").at("confusion").is_array());
}
