#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace posture {

// Dense row-major matrix of doubles; one row per sample.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), values(r * c, fill) {}

    double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }

    std::span<const double> row(std::size_t r) const { return {values.data() + r * cols, cols}; }
    std::span<double> row(std::size_t r) { return {values.data() + r * cols, cols}; }

    bool operator==(const Matrix&) const = default;
};

inline Matrix take_rows(const Matrix& m, std::span<const std::size_t> rows) {
    Matrix out(rows.size(), m.cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto src = m.row(rows[i]);
        std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
}

}  // namespace posture
