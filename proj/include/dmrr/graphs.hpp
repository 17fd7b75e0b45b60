#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "dmrr/datasets.hpp"
#include "dmrr/matrix.hpp"

namespace dmrr::graphs {

enum class Side { Sample, Feature };

/// Degrees below this are floored before inverse-square-root normalization.
inline constexpr double kDegreeFloor = 1e-12;

struct GraphParams {
    std::size_t k = 5;
    double gamma = 8.0;
};

/// Symmetric kNN affinity over samples (n x n) or features (d x d).
struct SimilarityGraph {
    CsrMatrix weights;
    double bandwidth = 0.0;
    Side side = Side::Sample;

    std::size_t size() const noexcept { return weights.rows(); }
};

/// Dense n x d sample-feature affinity. The feature-sample block is its
/// transpose and is never stored separately.
struct BipartiteGraph {
    DenseMatrix weights;
    double bandwidth = 0.0;
    std::vector<double> feature_means;
};

enum class Axis { Rows, Cols };

struct DegreeVector {
    std::vector<double> degrees;
    Axis axis = Axis::Rows;
};

/// Normalized affinity blocks of the coupled sample/feature operator
///   L = 2I - lambda2 * [[S11, S12], [S12^T, S22]].
class DualLaplacian {
public:
    DualLaplacian(CsrMatrix s11, CsrMatrix s22, DenseMatrix s12, double lambda2);

    std::size_t n() const noexcept { return s11_.rows(); }
    std::size_t d() const noexcept { return s22_.rows(); }
    double lambda2() const noexcept { return lambda2_; }
    DualLaplacian with_lambda2(double lambda2) const;

    const CsrMatrix& s11() const noexcept { return s11_; }
    const CsrMatrix& s22() const noexcept { return s22_; }
    const DenseMatrix& s12() const noexcept { return s12_; }

    /// out = S12 v (length n)
    void s12_times(std::span<const double> v, std::span<double> out) const;
    /// out = S12^T u (length d)
    void s21_times(std::span<const double> u, std::span<double> out) const;

    /// Applies L to the stacked vector [u; v].
    void apply(std::span<const double> u, std::span<const double> v, std::span<double> out_u,
               std::span<double> out_v) const;

    /// Dense (n+d) x (n+d) L, for small fixtures only.
    DenseMatrix to_dense() const;

private:
    CsrMatrix s11_;
    CsrMatrix s22_;
    DenseMatrix s12_;
    double lambda2_;
};

/// Squared Euclidean distances between rows (Sample) or columns (Feature).
DenseMatrix pairwise_sq_dists(const DataMatrix& matrix, Side side);

/// Median of the strictly-upper-triangle Euclidean distances (square roots of
/// the stored squared distances). Throws DegenerateDataError if it is zero.
double median_bandwidth(const DenseMatrix& sq_dists);

/// kNN graph (union symmetrization) with Gaussian weights exp(-gamma*d^2/delta^2).
SimilarityGraph knn_gaussian_graph(const DataMatrix& matrix, Side side, const GraphParams& params);
/// Same, from precomputed squared distances.
SimilarityGraph knn_gaussian_graph(const DenseMatrix& sq_dists, Side side, const GraphParams& params);

/// Max over features of the median absolute deviation from the feature mean.
double bipartite_bandwidth(const DataMatrix& matrix);
double bipartite_bandwidth(const DenseMatrix& values);

BipartiteGraph bipartite_graph(const DataMatrix& matrix, double gamma);
BipartiteGraph bipartite_graph(const DenseMatrix& values, double gamma);

DegreeVector degree_vector(const CsrMatrix& weights, Axis axis);
DegreeVector degree_vector(const DenseMatrix& weights, Axis axis);

DualLaplacian dual_laplacian(const SimilarityGraph& a11, const SimilarityGraph& a22,
                             const BipartiteGraph& a12, double lambda2);

/// D^{-1/2} W D^{-1/2} for a symmetric kNN graph (degree floor applied).
CsrMatrix normalized_affinity(const SimilarityGraph& graph);

/// D_u^{-1/2} A12 D_v^{-1/2} with row/column degree sums of A12 (floor applied).
DenseMatrix normalized_bipartite(const BipartiteGraph& graph);

/// Writes "row,col,weight" lines for every stored entry.
void write_coo(std::ostream& out, const CsrMatrix& weights);
void write_coo(std::ostream& out, const DenseMatrix& weights);

/// Number of kNN/bipartite graphs built by this process (instrumentation).
std::size_t construction_count() noexcept;
void reset_construction_count() noexcept;

}  // namespace dmrr::graphs
