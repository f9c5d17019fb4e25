#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pseudovec {

// Dense row-major matrix of doubles. Rows are the unit of concurrent
// access during training: hogwild threads may update the same row
// unsynchronized, so the storage is plain and unguarded.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double* row(std::size_t r) { return data_.data() + r * cols_; }
    const double* row(std::size_t r) const { return data_.data() + r * cols_; }
    std::span<double> row_span(std::size_t r) { return {row(r), cols_}; }
    std::span<const double> row_span(std::size_t r) const { return {row(r), cols_}; }

    double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::size_t size() const { return data_.size(); }

    bool operator==(const Matrix&) const = default;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

} // namespace pseudovec
