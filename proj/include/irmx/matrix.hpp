#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace irmx {

// Dense row-major matrix of doubles. Just enough for datasets and layer weights.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::span<double> flat() { return data_; }
    std::span<const double> flat() const { return data_; }

    // Copies the listed rows, in order, into a new matrix.
    Matrix select_rows(std::span<const std::size_t> indices) const {
        Matrix out(indices.size(), cols_);
        for (std::size_t i = 0; i < indices.size(); ++i) {
            if (indices[i] >= rows_) throw std::out_of_range("Matrix::select_rows: index out of range");
            auto src = row(indices[i]);
            auto dst = out.row(i);
            for (std::size_t c = 0; c < cols_; ++c) dst[c] = src[c];
        }
        return out;
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

}  // namespace irmx
