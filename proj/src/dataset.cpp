#include "posture/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "posture/error.hpp"
#include "posture/rng.hpp"

namespace posture {

FeatureSchema FeatureSchema::physiological() {
    FeatureSchema schema;
    schema.feature_names = {"egg", "heart_rate", "respiration_rate", "spo2"};
    schema.units = {"dimensionless", "beats/min", "breaths/min", "percent"};
    schema.class_names = {"right", "supine", "left"};
    return schema;
}

void validate(const Dataset& data) {
    const auto& schema = data.schema;
    if (schema.feature_names.size() != 4) {
        throw DataError("schema must name exactly 4 features");
    }
    if (std::set<std::string>(schema.feature_names.begin(), schema.feature_names.end()).size() !=
        schema.feature_names.size()) {
        throw DataError("schema feature names must be unique");
    }
    if (schema.class_names.size() != 3) {
        throw DataError("schema must name exactly 3 classes");
    }
    if (schema.units.size() != schema.feature_names.size()) {
        throw DataError("schema units must match feature count");
    }
    if (data.features.cols != schema.arity()) {
        throw DataError("feature matrix width does not match schema arity");
    }
    if (data.features.rows != data.labels.size()) {
        throw DataError("feature row count does not match label count");
    }
    for (std::size_t r = 0; r < data.features.rows; ++r) {
        for (std::size_t c = 0; c < data.features.cols; ++c) {
            if (!std::isfinite(data.features.at(r, c))) {
                throw DataError("non-finite feature value at row " + std::to_string(r + 1) +
                                ", column " + schema.feature_names[c]);
            }
        }
    }
    for (std::size_t i = 0; i < data.labels.size(); ++i) {
        if (data.labels[i] < 0 || data.labels[i] >= schema.n_classes()) {
            throw DataError("label out of range at row " + std::to_string(i + 1));
        }
    }
}

Dataset take_rows(const Dataset& data, std::span<const std::size_t> rows) {
    Dataset out;
    out.schema = data.schema;
    out.features = take_rows(data.features, rows);
    out.labels.reserve(rows.size());
    for (std::size_t r : rows) out.labels.push_back(data.labels[r]);
    return out;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string::size_type start = 0;
    while (true) {
        auto comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

double parse_feature(const std::string& field, std::size_t row, const std::string& column) {
    double value = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        throw DataError("row " + std::to_string(row) + ", column " + column +
                        ": cannot parse '" + field + "' as a number");
    }
    if (!std::isfinite(value)) {
        throw DataError("row " + std::to_string(row) + ", column " + column +
                        ": non-finite value '" + field + "'");
    }
    return value;
}

int parse_label(const std::string& field, std::size_t row, const FeatureSchema& schema) {
    for (int c = 0; c < schema.n_classes(); ++c) {
        if (field == schema.class_names[static_cast<std::size_t>(c)]) return c;
    }
    int code = 0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, code);
    if (ec == std::errc{} && ptr == last) {
        if (code < 0 || code >= schema.n_classes()) {
            throw DataError("row " + std::to_string(row) + ": label code " + field +
                            " out of range");
        }
        return code;
    }
    throw DataError("row " + std::to_string(row) + ": unknown label '" + field + "'");
}

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

// Shortest round-trip decimal form; reloading a written CSV yields
// bit-identical feature values.
std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
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

}  // namespace

Dataset load_csv(const std::filesystem::path& path, const FeatureSchema& schema) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset file: " + path.string());

    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("dataset file has no header row: " + path.string());
    }
    strip_cr(line);

    std::vector<std::string> expected = schema.feature_names;
    expected.push_back("position");
    const auto header = split_fields(line);
    if (header != expected) {
        std::string want;
        for (std::size_t i = 0; i < expected.size(); ++i) {
            if (i) want += ',';
            want += expected[i];
        }
        throw DataError("header mismatch: expected '" + want + "', got '" + line + "'");
    }

    std::vector<double> values;
    std::vector<int> labels;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        strip_cr(line);
        ++row;
        const auto fields = split_fields(line);
        if (fields.size() != schema.arity() + 1) {
            throw DataError("row " + std::to_string(row) + ": expected " +
                            std::to_string(schema.arity() + 1) + " fields, got " +
                            std::to_string(fields.size()));
        }
        for (std::size_t c = 0; c < schema.arity(); ++c) {
            values.push_back(parse_feature(fields[c], row, schema.feature_names[c]));
        }
        labels.push_back(parse_label(fields.back(), row, schema));
    }

    Dataset data;
    data.schema = schema;
    data.features = Matrix(row, schema.arity());
    data.features.values = std::move(values);
    data.labels = std::move(labels);
    validate(data);
    return data;
}

Dataset load_csv(const std::filesystem::path& path) {
    return load_csv(path, FeatureSchema::physiological());
}

void save_csv(const Dataset& data, const std::filesystem::path& path) {
    validate(data);
    std::string out;
    for (std::size_t i = 0; i < data.schema.arity(); ++i) {
        if (i) out += ',';
        out += data.schema.feature_names[i];
    }
    out += ",position\n";
    for (std::size_t r = 0; r < data.size(); ++r) {
        for (std::size_t c = 0; c < data.schema.arity(); ++c) {
            if (c) out += ',';
            out += format_double(data.features.at(r, c));
        }
        out += ',';
        out += data.schema.class_names[static_cast<std::size_t>(data.labels[r])];
        out += '\n';
    }
    write_text_atomic(path, out);
}

SplitResult split(const Dataset& data, double test_fraction, std::uint64_t seed,
                  bool stratified) {
    if (!(test_fraction >= 0.0 && test_fraction < 1.0)) {
        throw ConfigError("test_fraction must lie in [0, 1)");
    }
    if (data.size() == 0 && test_fraction > 0.0) {
        throw DataError("cannot split an empty dataset");
    }

    Rng rng(seed);
    std::vector<std::size_t> test_idx;
    if (stratified) {
        for (int c = 0; c < data.schema.n_classes(); ++c) {
            std::vector<std::size_t> class_rows;
            for (std::size_t i = 0; i < data.size(); ++i) {
                if (data.labels[i] == c) class_rows.push_back(i);
            }
            const auto take = static_cast<std::size_t>(
                std::llround(static_cast<double>(class_rows.size()) * test_fraction));
            rng.shuffle(class_rows);
            test_idx.insert(test_idx.end(), class_rows.begin(), class_rows.begin() + take);
        }
    } else {
        std::vector<std::size_t> rows(data.size());
        for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
        const auto take = static_cast<std::size_t>(
            std::llround(static_cast<double>(data.size()) * test_fraction));
        rng.shuffle(rows);
        test_idx.assign(rows.begin(), rows.begin() + take);
    }

    std::sort(test_idx.begin(), test_idx.end());
    std::vector<char> in_test(data.size(), 0);
    for (std::size_t i : test_idx) in_test[i] = 1;
    std::vector<std::size_t> train_idx;
    train_idx.reserve(data.size() - test_idx.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (!in_test[i]) train_idx.push_back(i);
    }

    return {take_rows(data, train_idx), take_rows(data, test_idx)};
}

ScalerParams fit_scaler(const Dataset& train) {
    if (train.size() == 0) throw DataError("cannot fit scaler on an empty dataset");
    const std::size_t n = train.size();
    const std::size_t m = train.features.cols;
    ScalerParams params;
    params.means.resize(m);
    params.stds.resize(m);
    for (std::size_t c = 0; c < m; ++c) {
        double sum = 0.0;
        for (std::size_t r = 0; r < n; ++r) sum += train.features.at(r, c);
        const double mean = sum / static_cast<double>(n);
        double sq = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const double d = train.features.at(r, c) - mean;
            sq += d * d;
        }
        params.means[c] = mean;
        params.stds[c] = std::sqrt(sq / static_cast<double>(n));
    }
    return params;
}

Dataset apply_scaler(const ScalerParams& params, const Dataset& data) {
    if (params.means.size() != data.schema.arity() || params.stds.size() != data.schema.arity()) {
        throw DataError("scaler parameter length does not match schema arity");
    }
    Dataset out = data;
    for (std::size_t c = 0; c < out.features.cols; ++c) {
        const double mean = params.means[c];
        const double std_dev = params.stds[c];
        for (std::size_t r = 0; r < out.features.rows; ++r) {
            out.features.at(r, c) =
                std_dev == 0.0 ? 0.0 : (out.features.at(r, c) - mean) / std_dev;
        }
    }
    return out;
}

namespace {

double pearson(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    const double denom = std::sqrt(sxx) * std::sqrt(syy);
    if (denom == 0.0) return 0.0;  // zero-variance convention
    return std::clamp(sxy / denom, -1.0, 1.0);
}

}  // namespace

CorrelationMatrix correlation_matrix(const Dataset& data) {
    if (data.size() < 2) {
        throw DataError("correlation requires at least 2 rows");
    }
    const std::size_t n = data.size();
    const std::size_t m = data.schema.arity();

    std::vector<std::vector<double>> columns(m + 1, std::vector<double>(n));
    for (std::size_t c = 0; c < m; ++c) {
        for (std::size_t r = 0; r < n; ++r) columns[c][r] = data.features.at(r, c);
    }
    for (std::size_t r = 0; r < n; ++r) {
        columns[m][r] = static_cast<double>(data.labels[r]);
    }

    CorrelationMatrix corr;
    corr.labels = data.schema.feature_names;
    corr.labels.push_back("position");
    corr.values = Matrix(m + 1, m + 1, 0.0);
    for (std::size_t i = 0; i <= m; ++i) {
        corr.values.at(i, i) = 1.0;
        for (std::size_t j = i + 1; j <= m; ++j) {
            const double r = pearson(columns[i], columns[j]);
            corr.values.at(i, j) = r;
            corr.values.at(j, i) = r;
        }
    }
    return corr;
}

std::string correlation_to_text(const CorrelationMatrix& corr) {
    std::size_t width = 0;
    for (const auto& label : corr.labels) width = std::max(width, label.size());
    width = std::max(width, std::size_t{7});  // room for "-0.000"

    std::ostringstream out;
    out << std::string(width + 2, ' ');
    for (const auto& label : corr.labels) {
        out << label << std::string(width + 2 - label.size(), ' ');
    }
    out << '\n';
    for (std::size_t i = 0; i < corr.labels.size(); ++i) {
        out << corr.labels[i] << std::string(width + 2 - corr.labels[i].size(), ' ');
        for (std::size_t j = 0; j < corr.labels.size(); ++j) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.3f", corr.values.at(i, j));
            const std::string cell(buf);
            out << cell << std::string(width + 2 - cell.size(), ' ');
        }
        out << '\n';
    }
    return out.str();
}

namespace {

void validate_synth(const SynthParams& params) {
    if (params.means.size() != 3 || params.stds.size() != 3) {
        throw ConfigError("synthesis parameters must cover exactly 3 classes");
    }
    for (std::size_t c = 0; c < 3; ++c) {
        if (params.means[c].size() != 4 || params.stds[c].size() != 4) {
            throw ConfigError("synthesis parameters must cover exactly 4 features");
        }
        for (double s : params.stds[c]) {
            if (!(s > 0.0)) throw ConfigError("synthesis stds must be positive");
        }
    }
    if (params.clamp_lo.size() != 4 || params.clamp_hi.size() != 4) {
        throw ConfigError("clamp ranges must cover exactly 4 features");
    }
    for (std::size_t f = 0; f < 4; ++f) {
        if (!(params.clamp_lo[f] < params.clamp_hi[f])) {
            throw ConfigError("clamp lower bound must be below the upper bound");
        }
    }
}

}  // namespace

SynthParams SynthParams::separated() {
    SynthParams p;
    //           egg   heart_rate  respiration  spo2
    p.means = {{1.8, 71.0, 18.0, 98.0},    // right
               {2.8, 72.0, 16.5, 96.5},    // supine
               {3.8, 73.0, 15.0, 95.0}};   // left
    p.stds = {{0.35, 8.0, 0.7, 0.5},
              {0.35, 8.0, 0.7, 0.5},
              {0.35, 8.0, 0.7, 0.5}};
    p.clamp_lo = {0.0, 30.0, 4.0, 85.0};
    p.clamp_hi = {10.0, 200.0, 60.0, 100.0};
    p.seed = 42;
    return p;
}

SynthParams SynthParams::noisy() {
    SynthParams p;
    p.means = {{2.4, 72.0, 16.6, 96.9},
               {2.6, 72.0, 16.0, 96.7},
               {2.8, 72.0, 15.4, 96.5}};
    p.stds = {{1.2, 10.0, 3.0, 1.8},
              {1.2, 10.0, 3.0, 1.8},
              {1.2, 10.0, 3.0, 1.8}};
    p.clamp_lo = {0.0, 30.0, 4.0, 85.0};
    p.clamp_hi = {10.0, 200.0, 60.0, 100.0};
    p.seed = 42;
    return p;
}

Dataset generate(const SynthParams& params, std::size_t n) {
    validate_synth(params);
    if (n % 3 != 0) {
        throw ConfigError("sample count must be divisible by 3 for equal class sizes");
    }

    Dataset data;
    data.schema = FeatureSchema::physiological();
    data.features = Matrix(n, 4);
    data.labels.resize(n);

    Rng rng(params.seed);
    const std::size_t per_class = n / 3;
    std::size_t row = 0;
    for (int c = 0; c < 3; ++c) {
        for (std::size_t i = 0; i < per_class; ++i, ++row) {
            for (std::size_t f = 0; f < 4; ++f) {
                const auto ci = static_cast<std::size_t>(c);
                double v = rng.normal(params.means[ci][f], params.stds[ci][f]);
                v = std::clamp(v, params.clamp_lo[f], params.clamp_hi[f]);
                data.features.at(row, f) = v;
            }
            data.labels[row] = c;
        }
    }
    validate(data);
    return data;
}

}  // namespace posture
