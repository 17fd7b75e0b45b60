#include "dmrr/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "dmrr/error.hpp"

namespace dmrr {
namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line, char delim) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(delim, start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::optional<double> parse_double(std::string_view s) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

// Lines with their 1-based numbers; blank lines are dropped.
std::vector<std::pair<std::size_t, std::string_view>> nonblank_lines(std::string_view text) {
    std::vector<std::pair<std::size_t, std::string_view>> lines;
    std::size_t lineno = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto pos = text.find('\n', start);
        const auto line = text.substr(start, pos == std::string_view::npos ? pos : pos - start);
        ++lineno;
        if (!trim(line).empty()) lines.emplace_back(lineno, line);
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return lines;
}

}  // namespace

DataMatrix::DataMatrix(DenseMatrix values, std::vector<std::string> feature_names)
    : values_(std::move(values)), feature_names_(std::move(feature_names)) {
    if (values_.rows() < 2 || values_.cols() < 2)
        throw DimensionError("data matrix must have n >= 2 and d >= 2, got " +
                             std::to_string(values_.rows()) + "x" + std::to_string(values_.cols()));
    for (double v : values_.data())
        if (!std::isfinite(v)) throw ParseError("data matrix contains a non-finite value");
    if (!feature_names_.empty() && feature_names_.size() != values_.cols())
        throw DimensionError("feature name count does not match d");
}

DenseMatrix DataMatrix::select_columns(std::span<const std::size_t> cols) const {
    DenseMatrix out(n(), cols.size());
    for (std::size_t i = 0; i < n(); ++i)
        for (std::size_t k = 0; k < cols.size(); ++k) out(i, k) = values_(i, cols[k]);
    return out;
}

LabelVector::LabelVector(const std::vector<std::string>& raw) {
    std::unordered_map<std::string, int> index;
    ids_.reserve(raw.size());
    for (const auto& name : raw) {
        auto [it, inserted] = index.try_emplace(name, static_cast<int>(names_.size()));
        if (inserted) names_.push_back(name);
        ids_.push_back(it->second);
    }
    if (names_.size() < 2)
        throw DimensionError("label vector needs at least 2 distinct classes, got " +
                             std::to_string(names_.size()));
}

LoadedData parse_matrix(std::string_view text, const LoadOptions& options) {
    auto lines = nonblank_lines(text);
    std::vector<std::string> header;
    if (options.has_header && !lines.empty()) {
        for (auto f : split(lines.front().second, options.delimiter)) header.emplace_back(f);
        lines.erase(lines.begin());
    }
    if (lines.empty()) throw DimensionError("data file has no rows");

    const std::size_t fields = split(lines.front().second, options.delimiter).size();
    if (options.label_column && *options.label_column >= fields)
        throw DimensionError("label column " + std::to_string(*options.label_column) +
                             " out of range for " + std::to_string(fields) + " fields");
    const std::size_t d = options.label_column ? fields - 1 : fields;

    std::vector<double> values;
    values.reserve(lines.size() * d);
    std::vector<std::string> labels;
    for (const auto& [lineno, line] : lines) {
        const auto cells = split(line, options.delimiter);
        if (cells.size() != fields)
            throw ParseError("expected " + std::to_string(fields) + " fields, found " +
                                 std::to_string(cells.size()),
                             lineno);
        for (std::size_t j = 0; j < cells.size(); ++j) {
            if (options.label_column && j == *options.label_column) {
                labels.emplace_back(cells[j]);
                continue;
            }
            const auto v = parse_double(cells[j]);
            if (!v) throw ParseError("non-numeric value '" + std::string(cells[j]) + "'", lineno);
            values.push_back(*v);
        }
    }

    std::vector<std::string> names;
    if (!header.empty() && header.size() == fields) {
        for (std::size_t j = 0; j < fields; ++j)
            if (!options.label_column || j != *options.label_column) names.push_back(header[j]);
    }

    LoadedData out{DataMatrix(DenseMatrix(lines.size(), d, std::move(values)), std::move(names)),
                   std::nullopt};
    if (options.label_column) out.labels.emplace(labels);
    return out;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

LoadedData load_matrix(const std::filesystem::path& path, const LoadOptions& options) {
    return parse_matrix(read_text_file(path), options);
}

LabelVector parse_labels(std::string_view text) {
    std::vector<std::string> raw;
    for (const auto& [lineno, line] : nonblank_lines(text)) raw.emplace_back(trim(line));
    if (raw.empty()) throw ParseError("label file is empty");
    return LabelVector(raw);
}

LabelVector load_labels(const std::filesystem::path& path) {
    return parse_labels(read_text_file(path));
}

void check_pairing(const DataMatrix& matrix, const LabelVector& labels) {
    if (labels.size() != matrix.n())
        throw DimensionError("label count " + std::to_string(labels.size()) +
                             " does not match sample count " + std::to_string(matrix.n()));
}

DatasetSummary describe(const DataMatrix& matrix) {
    DatasetSummary s;
    s.n = matrix.n();
    s.d = matrix.d();
    s.mins.assign(s.d, 0.0);
    s.maxs.assign(s.d, 0.0);
    s.means.assign(s.d, 0.0);
    for (std::size_t j = 0; j < s.d; ++j) {
        double lo = matrix(0, j), hi = matrix(0, j), total = 0.0;
        for (std::size_t i = 0; i < s.n; ++i) {
            lo = std::min(lo, matrix(i, j));
            hi = std::max(hi, matrix(i, j));
            total += matrix(i, j);
        }
        s.mins[j] = lo;
        s.maxs[j] = hi;
        // clamp so a constant column reports min == max == mean exactly
        s.means[j] = std::clamp(total / static_cast<double>(s.n), lo, hi);
    }
    return s;
}

}  // namespace dmrr
