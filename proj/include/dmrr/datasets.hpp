#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dmrr/matrix.hpp"

namespace dmrr {

/// n x d data matrix, one row per sample and one column per feature.
/// Construction validates n >= 2, d >= 2 and that every entry is finite.
class DataMatrix {
public:
    explicit DataMatrix(DenseMatrix values, std::vector<std::string> feature_names = {});

    std::size_t n() const noexcept { return values_.rows(); }
    std::size_t d() const noexcept { return values_.cols(); }
    const DenseMatrix& values() const noexcept { return values_; }
    const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }

    double operator()(std::size_t i, std::size_t j) const noexcept { return values_(i, j); }

    /// Columns `cols` in the given order, as a plain matrix (used by k-means).
    DenseMatrix select_columns(std::span<const std::size_t> cols) const;

private:
    DenseMatrix values_;
    std::vector<std::string> feature_names_;
};

/// Ground-truth classes mapped to dense ids 0..c-1 in first-appearance order.
class LabelVector {
public:
    explicit LabelVector(const std::vector<std::string>& raw);

    std::size_t size() const noexcept { return ids_.size(); }
    std::size_t num_classes() const noexcept { return names_.size(); }
    const std::vector<int>& ids() const noexcept { return ids_; }
    const std::vector<std::string>& class_names() const noexcept { return names_; }

private:
    std::vector<int> ids_;
    std::vector<std::string> names_;
};

struct LoadOptions {
    char delimiter = ',';
    bool has_header = false;
    std::optional<std::size_t> label_column;
};

struct LoadedData {
    DataMatrix matrix;
    std::optional<LabelVector> labels;
};

LoadedData parse_matrix(std::string_view text, const LoadOptions& options = {});
LoadedData load_matrix(const std::filesystem::path& path, const LoadOptions& options = {});

LabelVector parse_labels(std::string_view text);
LabelVector load_labels(const std::filesystem::path& path);

/// Throws DimensionError unless labels.size() == matrix.n().
void check_pairing(const DataMatrix& matrix, const LabelVector& labels);

struct DatasetSummary {
    std::size_t n = 0;
    std::size_t d = 0;
    std::vector<double> mins;
    std::vector<double> maxs;
    std::vector<double> means;
};

DatasetSummary describe(const DataMatrix& matrix);

/// Reads a whole file; throws std::runtime_error when it cannot be opened.
std::string read_text_file(const std::filesystem::path& path);

}  // namespace dmrr
