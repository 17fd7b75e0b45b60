#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dmrr/datasets.hpp"
#include "dmrr/matrix.hpp"

namespace dmrr::eval {

struct ClusteringRun {
    std::vector<int> assignments;  // cluster id per sample, in 0..c-1
    double inertia = 0.0;
    std::uint64_t seed = 0;
    std::size_t iterations = 0;
};

struct MetricsRecord {
    double acc = 0.0;
    double nmi = 0.0;
    double purity = 0.0;
};

struct MetricsSummary {
    MetricsRecord mean;
    MetricsRecord stddev;  // population standard deviation over runs
};

/// Lloyd's k-means with k-means++ seeding; squared Euclidean distance on the
/// given rows, at most `max_iters` assignment rounds.
ClusteringRun kmeans(const DenseMatrix& data, std::size_t c, std::uint64_t seed,
                     std::size_t max_iters = 300);

/// Clustering accuracy under the best one-to-one cluster/class mapping.
double acc(std::span<const int> pred, std::span<const int> truth);
/// Mutual information normalized by the larger of the two entropies.
double nmi(std::span<const int> pred, std::span<const int> truth);
double purity(std::span<const int> pred, std::span<const int> truth);

MetricsRecord evaluate(std::span<const int> pred, std::span<const int> truth);
MetricsSummary summarize(std::span<const MetricsRecord> runs);

/// Maximum-weight perfect matching on a square matrix (Hungarian method).
/// Returns, for each row, the assigned column.
std::vector<std::size_t> max_weight_assignment(const DenseMatrix& weights);

}  // namespace dmrr::eval
