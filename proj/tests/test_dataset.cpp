#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "posture/dataset.hpp"
#include "posture/error.hpp"
#include "posture/rng.hpp"
#include "test_support.hpp"

using namespace posture;
using posture::testing::dataset_from_columns;
using posture::testing::TempDir;
using posture::testing::write_file;

namespace {

const char* kHeader = "egg,heart_rate,respiration_rate,spo2,position\n";

Dataset small_fixture() {
    return dataset_from_columns({{{2.0, 4.0, 6.0},         // egg
                                  {5.0, 5.0, 5.0},         // heart_rate (constant)
                                  {-1.0, 0.0, 1.0},        // respiration_rate
                                  {90.0, 95.0, 100.0}}},   // spo2
                                {0, 1, 2});
}

}  // namespace

TEST_CASE("load_csv reads a generated fixture back") {
    TempDir dir;
    const Dataset data = generate(SynthParams::separated(), 180);
    save_csv(data, dir.file("data.csv"));
    const Dataset loaded = load_csv(dir.file("data.csv"));
    CHECK(loaded.size() == 180);
    // Shortest round-trip formatting: reload is bit-identical.
    CHECK(loaded == data);
}

TEST_CASE("load_csv accepts a header-only file as empty") {
    TempDir dir;
    write_file(dir.file("empty.csv"), kHeader);
    const Dataset data = load_csv(dir.file("empty.csv"));
    CHECK(data.size() == 0);
}

TEST_CASE("load_csv reports non-finite values with row and column") {
    TempDir dir;
    std::string csv = kHeader;
    for (int i = 0; i < 6; ++i) csv += "2.0,70,16,97,right\n";
    csv += "2.0,70,16,NaN,supine\n";
    write_file(dir.file("bad.csv"), csv);
    CHECK_THROWS_WITH_AS(load_csv(dir.file("bad.csv")),
                         doctest::Contains("row 7"), DataError);
    try {
        load_csv(dir.file("bad.csv"));
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("spo2") != std::string::npos);
    }
}

TEST_CASE("load_csv rejects schema violations") {
    TempDir dir;
    SUBCASE("missing column") {
        write_file(dir.file("a.csv"), "egg,heart_rate,respiration_rate,position\n");
        CHECK_THROWS_AS(load_csv(dir.file("a.csv")), DataError);
    }
    SUBCASE("extra column") {
        write_file(dir.file("b.csv"),
                   "egg,heart_rate,respiration_rate,spo2,extra,position\n");
        CHECK_THROWS_AS(load_csv(dir.file("b.csv")), DataError);
    }
    SUBCASE("unknown label") {
        write_file(dir.file("c.csv"), std::string(kHeader) + "2,70,16,97,standing\n");
        CHECK_THROWS_WITH_AS(load_csv(dir.file("c.csv")),
                             doctest::Contains("unknown label"), DataError);
    }
    SUBCASE("label code out of range") {
        write_file(dir.file("d.csv"), std::string(kHeader) + "2,70,16,97,3\n");
        CHECK_THROWS_AS(load_csv(dir.file("d.csv")), DataError);
    }
    SUBCASE("non-numeric feature") {
        write_file(dir.file("e.csv"), std::string(kHeader) + "2,abc,16,97,left\n");
        CHECK_THROWS_WITH_AS(load_csv(dir.file("e.csv")),
                             doctest::Contains("heart_rate"), DataError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_csv(dir.file("nope.csv")), DataError);
    }
}

TEST_CASE("load_csv accepts integer label codes") {
    TempDir dir;
    write_file(dir.file("codes.csv"),
               std::string(kHeader) + "2,70,16,97,0\n2,70,16,97,1\n2,70,16,97,2\n");
    const Dataset data = load_csv(dir.file("codes.csv"));
    CHECK(data.labels == std::vector<int>{0, 1, 2});
}

TEST_CASE("stratified split hits exact per-class counts") {
    const Dataset data = generate(SynthParams::separated(), 180);
    const auto [train, test] = split(data, 0.2, 42, true);
    CHECK(train.size() == 144);
    CHECK(test.size() == 36);
    std::array<int, 3> per_class = {0, 0, 0};
    for (int label : test.labels) per_class[static_cast<std::size_t>(label)] += 1;
    CHECK(per_class[0] == 12);
    CHECK(per_class[1] == 12);
    CHECK(per_class[2] == 12);
}

TEST_CASE("split with fraction zero returns the data unchanged") {
    const Dataset data = generate(SynthParams::separated(), 18);
    const auto [train, test] = split(data, 0.0, 7, true);
    CHECK(test.size() == 0);
    CHECK(train == data);
}

TEST_CASE("split is deterministic per seed and varies across seeds") {
    const Dataset data = generate(SynthParams::separated(), 180);
    const auto a = split(data, 0.2, 1, true);
    const auto b = split(data, 0.2, 1, true);
    CHECK(a.train == b.train);
    CHECK(a.test == b.test);
    const auto c = split(data, 0.2, 2, true);
    CHECK(a.test.features != c.test.features);
}

TEST_CASE("split rejects fractions outside [0,1)") {
    const Dataset data = generate(SynthParams::separated(), 18);
    CHECK_THROWS_AS(split(data, 1.0, 0, true), ConfigError);
    CHECK_THROWS_AS(split(data, -0.1, 0, true), ConfigError);
    Dataset empty;
    empty.schema = FeatureSchema::physiological();
    empty.features = Matrix(0, 4);
    CHECK_THROWS_AS(split(empty, 0.5, 0, true), DataError);
}

TEST_CASE("split partitions are disjoint and exhaustive") {
    const Dataset data = generate(SynthParams::separated(), 60);
    for (bool stratified : {true, false}) {
        for (std::uint64_t seed : {0ull, 3ull, 99ull}) {
            const auto [train, test] = split(data, 0.25, seed, stratified);
            CHECK(train.size() + test.size() == data.size());
            // Row multisets must partition the original rows exactly.
            std::multiset<std::vector<double>> original, recombined;
            for (std::size_t r = 0; r < data.size(); ++r) {
                auto row = data.features.row(r);
                original.insert({row.begin(), row.end()});
            }
            for (const auto* part : {&train, &test}) {
                for (std::size_t r = 0; r < part->size(); ++r) {
                    auto row = part->features.row(r);
                    recombined.insert({row.begin(), row.end()});
                }
            }
            CHECK(original == recombined);
        }
    }
}

TEST_CASE("fit_scaler uses the population formula") {
    const ScalerParams params = fit_scaler(small_fixture());
    CHECK(params.means[0] == doctest::Approx(4.0));
    CHECK(params.stds[0] == doctest::Approx(std::sqrt(8.0 / 3.0)).epsilon(1e-9));
    CHECK(params.stds[0] == doctest::Approx(1.63299).epsilon(1e-4));
    CHECK(params.means[1] == doctest::Approx(5.0));
    CHECK(params.stds[1] == 0.0);
    // Already standardized column stays standardized.
    const double rr_std = std::sqrt(2.0 / 3.0);
    const Dataset scaled = apply_scaler(params, small_fixture());
    CHECK(params.stds[2] == doctest::Approx(rr_std).epsilon(1e-12));
    (void)scaled;

    Dataset empty;
    empty.schema = FeatureSchema::physiological();
    empty.features = Matrix(0, 4);
    CHECK_THROWS_AS(fit_scaler(empty), DataError);
}

TEST_CASE("apply_scaler standardizes and zeroes constant columns") {
    const Dataset data = small_fixture();
    const ScalerParams params = fit_scaler(data);
    const Dataset scaled = apply_scaler(params, data);
    CHECK(scaled.features.at(0, 0) == doctest::Approx(-1.2247).epsilon(1e-4));
    CHECK(scaled.features.at(1, 0) == doctest::Approx(0.0));
    CHECK(scaled.features.at(2, 0) == doctest::Approx(1.2247).epsilon(1e-4));
    for (std::size_t r = 0; r < 3; ++r) CHECK(scaled.features.at(r, 1) == 0.0);
    CHECK(scaled.labels == data.labels);
}

TEST_CASE("scaling leaves train columns at mean 0, std 1") {
    const Dataset data = generate(SynthParams::separated(), 90);
    const auto [train, test] = split(data, 0.2, 5, true);
    const Dataset scaled = apply_scaler(fit_scaler(train), train);
    const std::size_t n = scaled.size();
    for (std::size_t c = 0; c < 4; ++c) {
        double mean = 0.0;
        for (std::size_t r = 0; r < n; ++r) mean += scaled.features.at(r, c);
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const double d = scaled.features.at(r, c) - mean;
            var += d * d;
        }
        var /= static_cast<double>(n);
        CHECK(std::abs(mean) < 1e-9);
        CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-9);
    }
}

TEST_CASE("correlation handles exact linear relations") {
    // Columns: f1 = 2 f0 (r = 1), f2 = -2 f0 + 8 (r = -1), f3 constant (r = 0).
    const Dataset data = dataset_from_columns({{{1.0, 2.0, 3.0},
                                                {2.0, 4.0, 6.0},
                                                {6.0, 4.0, 2.0},
                                                {7.0, 7.0, 7.0}}},
                                              {0, 1, 2});
    const CorrelationMatrix corr = correlation_matrix(data);
    CHECK(corr.labels.size() == 5);
    CHECK(corr.labels[4] == "position");
    CHECK(corr.values.at(0, 1) == doctest::Approx(1.0));
    CHECK(corr.values.at(0, 2) == doctest::Approx(-1.0));
    CHECK(corr.values.at(0, 3) == 0.0);
    CHECK(corr.values.at(3, 3) == 1.0);
    // Position is the class code 0,1,2: perfectly correlated with f0 here.
    CHECK(corr.values.at(0, 4) == doctest::Approx(1.0));
}

TEST_CASE("correlation matches the hand-computed 0.8 case") {
    const Dataset data = dataset_from_columns({{{1.0, 2.0, 3.0, 4.0},
                                                {1.0, 3.0, 2.0, 4.0},
                                                {0.0, 0.0, 0.0, 0.0},
                                                {1.0, 1.0, 1.0, 1.0}}},
                                              {0, 0, 1, 1});
    const CorrelationMatrix corr = correlation_matrix(data);
    CHECK(corr.values.at(0, 1) == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("correlation requires at least two rows") {
    const Dataset data = dataset_from_columns({{{1.0}, {2.0}, {3.0}, {4.0}}}, {0});
    CHECK_THROWS_AS(correlation_matrix(data), DataError);
}

TEST_CASE("correlation matrix is symmetric, unit-diagonal, bounded") {
    const Dataset data = generate(SynthParams::noisy(), 120);
    const CorrelationMatrix corr = correlation_matrix(data);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(corr.values.at(i, i) == 1.0);
        for (std::size_t j = 0; j < 5; ++j) {
            CHECK(corr.values.at(i, j) == corr.values.at(j, i));
            CHECK(corr.values.at(i, j) >= -1.0);
            CHECK(corr.values.at(i, j) <= 1.0);
        }
    }
}

TEST_CASE("generate balances classes and respects clamps") {
    const Dataset six = generate(SynthParams::separated(), 6);
    std::array<int, 3> counts = {0, 0, 0};
    for (int label : six.labels) counts[static_cast<std::size_t>(label)] += 1;
    CHECK(counts == std::array<int, 3>{2, 2, 2});

    SynthParams wide = SynthParams::separated();
    wide.stds = {{3.0, 40.0, 10.0, 9.0}, {3.0, 40.0, 10.0, 9.0}, {3.0, 40.0, 10.0, 9.0}};
    const Dataset wild = generate(wide, 300);
    for (std::size_t r = 0; r < wild.size(); ++r) {
        CHECK(wild.features.at(r, 3) >= 85.0);
        CHECK(wild.features.at(r, 3) <= 100.0);
    }
}

TEST_CASE("generated correlations carry the expected signs") {
    const Dataset data = generate(SynthParams::separated(), 180);
    const CorrelationMatrix corr = correlation_matrix(data);
    CHECK(corr.values.at(0, 4) > 0.0);   // egg vs position
    CHECK(corr.values.at(3, 4) < 0.0);   // spo2 vs position
    CHECK(corr.values.at(2, 4) < 0.0);   // respiration vs position
}

TEST_CASE("generate is a pure function of params and n") {
    const SynthParams params = SynthParams::separated();
    CHECK(generate(params, 90) == generate(params, 90));
    CHECK_THROWS_AS(generate(params, 181), ConfigError);
    SynthParams bad = params;
    bad.stds[1][2] = 0.0;
    CHECK_THROWS_AS(generate(bad, 9), ConfigError);
}
