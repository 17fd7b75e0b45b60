#include "dmrr/matrix.hpp"

#include <algorithm>
#include <stdexcept>

#include "dmrr/kernels.hpp"

namespace dmrr {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_)
        throw std::invalid_argument("DenseMatrix: data size does not match shape");
}

DenseMatrix DenseMatrix::transposed() const {
    DenseMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

void DenseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t i = 0; i < rows_; ++i) y[i] = kernels::dot(row(i), x);
}

void DenseMatrix::multiply_transposed(std::span<const double> x, std::span<double> y) const {
    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t i = 0; i < rows_; ++i)
        if (x[i] != 0.0) kernels::axpy(x[i], row(i), y);
}

CsrMatrix CsrMatrix::from_triplets(std::size_t rows, std::size_t cols, std::vector<Entry> entries) {
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    CsrMatrix m(rows, cols);
    m.col_idx_.reserve(entries.size());
    m.values_.reserve(entries.size());
    for (std::size_t k = 0; k < entries.size(); ++k) {
        const Entry& e = entries[k];
        if (e.row >= rows || e.col >= cols) throw std::out_of_range("CsrMatrix: triplet out of range");
        if (k > 0 && entries[k - 1].row == e.row && entries[k - 1].col == e.col)
            throw std::invalid_argument("CsrMatrix: duplicate triplet");
        ++m.row_ptr_[e.row + 1];
        m.col_idx_.push_back(e.col);
        m.values_.push_back(e.value);
    }
    for (std::size_t i = 0; i < rows; ++i) m.row_ptr_[i + 1] += m.row_ptr_[i];
    return m;
}

double CsrMatrix::at(std::size_t i, std::size_t j) const noexcept {
    const auto idx = row_indices(i);
    const auto it = std::lower_bound(idx.begin(), idx.end(), j);
    if (it == idx.end() || *it != j) return 0.0;
    return row_values(i)[static_cast<std::size_t>(it - idx.begin())];
}

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t i = 0; i < rows_; ++i) {
        double s = 0.0;
        for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) s += values_[p] * x[col_idx_[p]];
        y[i] = s;
    }
}

DenseMatrix CsrMatrix::to_dense() const {
    DenseMatrix d(rows_, cols_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) d(i, col_idx_[p]) = values_[p];
    return d;
}

}  // namespace dmrr
