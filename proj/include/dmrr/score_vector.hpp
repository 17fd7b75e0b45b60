#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dmrr {

enum class ScoreSide { Sample, Feature };

/// A point of the probability simplex: nonnegative entries summing to one.
struct ScoreVector {
    std::vector<double> values;
    ScoreSide side = ScoreSide::Feature;

    std::size_t size() const noexcept { return values.size(); }
    std::span<const double> span() const noexcept { return values; }

    static ScoreVector uniform(std::size_t n, ScoreSide side) {
        return {std::vector<double>(n, 1.0 / static_cast<double>(n)), side};
    }
};

/// min >= 0 and |sum - 1| <= tol.
bool on_simplex(std::span<const double> z, double tol = 1e-9) noexcept;

}  // namespace dmrr
