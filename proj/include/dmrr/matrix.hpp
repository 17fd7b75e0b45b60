#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dmrr {

/// Dense row-major matrix of doubles.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const noexcept {
        return {data_.data() + i * cols_, cols_};
    }

    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }

    DenseMatrix transposed() const;

    /// y = M x
    void multiply(std::span<const double> x, std::span<double> y) const;
    /// y = M^T x, computed from the same row-major storage.
    void multiply_transposed(std::span<const double> x, std::span<double> y) const;

    bool operator==(const DenseMatrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Compressed sparse row matrix. Column indices within a row are strictly increasing.
class CsrMatrix {
public:
    struct Entry {
        std::size_t row;
        std::size_t col;
        double value;
    };

    CsrMatrix() = default;
    CsrMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {}

    /// Builds from coordinate triplets; duplicates are not allowed.
    static CsrMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Entry> entries);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t nnz() const noexcept { return values_.size(); }

    std::span<const std::size_t> row_indices(std::size_t i) const noexcept {
        return {col_idx_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
    }
    std::span<const double> row_values(std::size_t i) const noexcept {
        return {values_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
    }
    std::span<double> row_values(std::size_t i) noexcept {
        return {values_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
    }

    /// Value at (i, j), 0 when not stored.
    double at(std::size_t i, std::size_t j) const noexcept;

    void multiply(std::span<const double> x, std::span<double> y) const;
    DenseMatrix to_dense() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::size_t> row_ptr_;
    std::vector<std::size_t> col_idx_;
    std::vector<double> values_;
};

}  // namespace dmrr
