#pragma once

#include <array>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "posture/dataset.hpp"

namespace posture::testing {

// Dataset with the shipped 4-feature schema from explicit columns.
inline Dataset dataset_from_columns(const std::array<std::vector<double>, 4>& columns,
                                    std::vector<int> labels) {
    Dataset data;
    data.schema = FeatureSchema::physiological();
    data.features = Matrix(labels.size(), 4);
    for (std::size_t c = 0; c < 4; ++c) {
        for (std::size_t r = 0; r < labels.size(); ++r) {
            data.features.at(r, c) = columns[c][r];
        }
    }
    data.labels = std::move(labels);
    return data;
}

// Unique scratch directory, removed on destruction.
class TempDir {
public:
    TempDir() {
        auto base = std::filesystem::temp_directory_path();
        for (int attempt = 0;; ++attempt) {
            path_ = base / ("posture_test_" + std::to_string(::getpid()) + "_" +
                            std::to_string(counter_++) + "_" + std::to_string(attempt));
            std::error_code ec;
            if (std::filesystem::create_directory(path_, ec)) break;
        }
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path file(const std::string& name) const { return path_ / name; }

private:
    static inline int counter_ = 0;
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace posture::testing
