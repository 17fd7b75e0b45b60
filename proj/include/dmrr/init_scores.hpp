#pragma once

#include <filesystem>
#include <string_view>
#include <vector>

#include "dmrr/datasets.hpp"
#include "dmrr/graphs.hpp"
#include "dmrr/score_vector.hpp"

namespace dmrr::scores {

enum class Orientation { HigherIsBetter, LowerIsBetter };

/// Scores from some feature scorer, before simplex normalization.
struct RawScores {
    std::vector<double> values;
    Orientation orientation = Orientation::HigherIsBetter;
};

/// Sample prior: per-feature min shift, row sums s, s /= max(s), s(1 - s),
/// then normalized to sum 1 (uniform when that leaves nothing).
ScoreVector initial_sample_scores(const DataMatrix& matrix);

/// Laplacian Score of every feature against the sample graph (lower is better).
/// Constant features receive the largest finite score + 1.
RawScores laplacian_score(const DataMatrix& matrix, const graphs::SimilarityGraph& sample_graph);

/// Orients (negating lower-is-better), shifts the minimum to 0 and divides by
/// the sum; uniform when every score is equal.
ScoreVector normalize_scores_to_simplex(const RawScores& raw);

/// One real per line. Throws DimensionError when the count differs from
/// `expected_count`, ParseError on a non-numeric line.
RawScores parse_external_scores(std::string_view text, Orientation orientation,
                                std::size_t expected_count);
RawScores load_external_scores(const std::filesystem::path& path, Orientation orientation,
                               std::size_t expected_count);

}  // namespace dmrr::scores
