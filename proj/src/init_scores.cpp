#include "dmrr/init_scores.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <cmath>
#include <string>

#include "dmrr/error.hpp"
#include "dmrr/kernels.hpp"

namespace dmrr {

bool on_simplex(std::span<const double> z, double tol) noexcept {
    double total = 0.0;
    for (double x : z) {
        if (!(x >= 0.0)) return false;
        total += x;
    }
    return std::fabs(total - 1.0) <= tol;
}

namespace scores {

ScoreVector initial_sample_scores(const DataMatrix& matrix) {
    const std::size_t n = matrix.n(), d = matrix.d();
    std::vector<double> col_min(d);
    for (std::size_t j = 0; j < d; ++j) {
        double lo = matrix(0, j);
        for (std::size_t i = 1; i < n; ++i) lo = std::min(lo, matrix(i, j));
        col_min[j] = lo;
    }
    std::vector<double> s(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) s[i] += matrix(i, j) - col_min[j];

    const double top = *std::max_element(s.begin(), s.end());
    if (!(top > 0.0)) return ScoreVector::uniform(n, ScoreSide::Sample);

    double total = 0.0;
    for (double& x : s) {
        x /= top;
        x = x * (1.0 - x);
        total += x;
    }
    if (!(total > 0.0)) return ScoreVector::uniform(n, ScoreSide::Sample);
    for (double& x : s) x /= total;
    return {std::move(s), ScoreSide::Sample};
}

RawScores laplacian_score(const DataMatrix& matrix, const graphs::SimilarityGraph& sample_graph) {
    const std::size_t n = matrix.n(), d = matrix.d();
    if (sample_graph.size() != n)
        throw DimensionError("sample graph has " + std::to_string(sample_graph.size()) +
                             " nodes, data has " + std::to_string(n) + " samples");
    const auto& w = sample_graph.weights;
    const auto deg = graphs::degree_vector(w, graphs::Axis::Rows).degrees;
    const double vol = std::accumulate(deg.begin(), deg.end(), 0.0);

    std::vector<double> score(d, 0.0);
    std::vector<bool> constant(d, false);
    std::vector<double> f(n);
    for (std::size_t r = 0; r < d; ++r) {
        bool is_const = true;
        for (std::size_t i = 0; i < n; ++i) {
            f[i] = matrix(i, r);
            is_const = is_const && f[i] == f[0];
        }
        if (is_const) {
            constant[r] = true;
            continue;
        }
        const double mean = kernels::dot(f, deg) / vol;
        for (double& x : f) x -= mean;
        // f^T (D - W) f = 1/2 sum_ij w_ij (f_i - f_j)^2
        double num = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto cols = w.row_indices(i);
            const auto vals = w.row_values(i);
            for (std::size_t p = 0; p < cols.size(); ++p) {
                const double diff = f[i] - f[cols[p]];
                num += vals[p] * diff * diff;
            }
        }
        num *= 0.5;
        double den = 0.0;
        for (std::size_t i = 0; i < n; ++i) den += deg[i] * f[i] * f[i];
        if (!(den > 0.0)) {
            constant[r] = true;
            continue;
        }
        score[r] = num / den;
    }

    double worst = 0.0;
    bool any = false;
    for (std::size_t r = 0; r < d; ++r)
        if (!constant[r]) {
            worst = any ? std::max(worst, score[r]) : score[r];
            any = true;
        }
    for (std::size_t r = 0; r < d; ++r)
        if (constant[r]) score[r] = worst + 1.0;
    return {std::move(score), Orientation::LowerIsBetter};
}

ScoreVector normalize_scores_to_simplex(const RawScores& raw) {
    const std::size_t d = raw.values.size();
    if (d == 0) throw DimensionError("cannot normalize an empty score vector");
    std::vector<double> v = raw.values;
    if (raw.orientation == Orientation::LowerIsBetter)
        for (double& x : v) x = -x;
    const double lo = *std::min_element(v.begin(), v.end());
    double total = 0.0;
    for (double& x : v) {
        x -= lo;
        total += x;
    }
    if (!(total > 0.0)) return ScoreVector::uniform(d, ScoreSide::Feature);
    for (double& x : v) x /= total;
    return {std::move(v), ScoreSide::Feature};
}

RawScores parse_external_scores(std::string_view text, Orientation orientation,
                                std::size_t expected_count) {
    RawScores out{{}, orientation};
    std::size_t lineno = 0, start = 0;
    while (start <= text.size()) {
        const auto pos = text.find('\n', start);
        auto line = text.substr(start, pos == std::string_view::npos ? pos : pos - start);
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first != std::string_view::npos) {
            line = line.substr(first, line.find_last_not_of(" \t\r") - first + 1);
            if (!line.empty() && line.front() == '+') line.remove_prefix(1);
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
            if (ec != std::errc() || ptr != line.data() + line.size() || !std::isfinite(v))
                throw ParseError("invalid score '" + std::string(line) + "'", lineno);
            out.values.push_back(v);
        }
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    if (out.values.size() != expected_count)
        throw DimensionError("score file has " + std::to_string(out.values.size()) +
                             " values, expected " + std::to_string(expected_count));
    return out;
}

RawScores load_external_scores(const std::filesystem::path& path, Orientation orientation,
                               std::size_t expected_count) {
    return parse_external_scores(read_text_file(path), orientation, expected_count);
}

}  // namespace scores
}  // namespace dmrr
