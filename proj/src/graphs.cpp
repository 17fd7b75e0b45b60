#include "dmrr/graphs.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

#include "dmrr/error.hpp"
#include "dmrr/kernels.hpp"

namespace dmrr::graphs {
namespace {

std::atomic<std::size_t> g_constructions{0};

double median_of(std::vector<double> values) {
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    const double upper = values[mid];
    if (values.size() % 2 == 1) return upper;
    const double lower =
        *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

std::vector<double> inv_sqrt_degrees(std::vector<double> degrees) {
    for (double& x : degrees) x = 1.0 / std::sqrt(std::max(x, kDegreeFloor));
    return degrees;
}

}  // namespace

std::size_t construction_count() noexcept { return g_constructions.load(); }
void reset_construction_count() noexcept { g_constructions.store(0); }

DenseMatrix pairwise_sq_dists(const DataMatrix& matrix, Side side) {
    const DenseMatrix points = side == Side::Sample ? matrix.values() : matrix.values().transposed();
    const std::size_t m = points.rows();
    DenseMatrix out(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            const double dist = kernels::sq_dist(points.row(i), points.row(j));
            out(i, j) = dist;
            out(j, i) = dist;
        }
    }
    return out;
}

double median_bandwidth(const DenseMatrix& sq_dists) {
    const std::size_t m = sq_dists.rows();
    if (m < 2 || sq_dists.cols() != m)
        throw DimensionError("median_bandwidth needs a square matrix over at least 2 nodes");
    std::vector<double> dists;
    dists.reserve(m * (m - 1) / 2);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) dists.push_back(std::sqrt(sq_dists(i, j)));
    const double delta = median_of(std::move(dists));
    if (!(delta > 0.0))
        throw DegenerateDataError("median pairwise distance is zero; kernel bandwidth undefined");
    return delta;
}

SimilarityGraph knn_gaussian_graph(const DenseMatrix& sq_dists, Side side, const GraphParams& params) {
    const std::size_t m = sq_dists.rows();
    if (params.k < 1 || params.k >= m)
        throw DimensionError("neighbor count k=" + std::to_string(params.k) + " must be in [1, " +
                             std::to_string(m) + ")");
    if (!(params.gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
    const double delta = median_bandwidth(sq_dists);
    const double scale = params.gamma / (delta * delta);

    // neighbor[i * m + j] set when j is among i's k nearest (ties by lower index)
    std::vector<char> neighbor(m * m, 0);
    std::vector<std::size_t> order(m - 1);
    for (std::size_t i = 0; i < m; ++i) {
        std::size_t p = 0;
        for (std::size_t j = 0; j < m; ++j)
            if (j != i) order[p++] = j;
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(params.k),
                          order.end(), [&](std::size_t a, std::size_t b) {
                              const double da = sq_dists(i, a), db = sq_dists(i, b);
                              return da != db ? da < db : a < b;
                          });
        for (std::size_t r = 0; r < params.k; ++r) neighbor[i * m + order[r]] = 1;
    }

    std::vector<CsrMatrix::Entry> entries;
    entries.reserve(2 * m * params.k);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            if (!neighbor[i * m + j] && !neighbor[j * m + i]) continue;
            const double w = std::exp(-scale * sq_dists(i, j));
            entries.push_back({i, j, w});
            entries.push_back({j, i, w});
        }
    }
    ++g_constructions;
    return SimilarityGraph{CsrMatrix::from_triplets(m, m, std::move(entries)), delta, side};
}

SimilarityGraph knn_gaussian_graph(const DataMatrix& matrix, Side side, const GraphParams& params) {
    return knn_gaussian_graph(pairwise_sq_dists(matrix, side), side, params);
}

namespace {

std::vector<double> feature_means(const DenseMatrix& matrix) {
    std::vector<double> means(matrix.cols(), 0.0);
    for (std::size_t i = 0; i < matrix.rows(); ++i) kernels::axpy(1.0, matrix.row(i), means);
    for (double& x : means) x /= static_cast<double>(matrix.rows());
    return means;
}

double bandwidth_from_means(const DenseMatrix& matrix, std::span<const double> means) {
    double delta = 0.0;
    std::vector<double> dev(matrix.rows());
    for (std::size_t j = 0; j < matrix.cols(); ++j) {
        for (std::size_t i = 0; i < matrix.rows(); ++i) dev[i] = std::fabs(matrix(i, j) - means[j]);
        delta = std::max(delta, median_of(dev));
    }
    if (!(delta > 0.0))
        throw DegenerateDataError(
            "every feature has zero median deviation from its mean; bipartite bandwidth undefined");
    return delta;
}

}  // namespace

double bipartite_bandwidth(const DenseMatrix& values) {
    if (values.rows() == 0 || values.cols() == 0) throw DimensionError("empty data matrix");
    return bandwidth_from_means(values, feature_means(values));
}

double bipartite_bandwidth(const DataMatrix& matrix) { return bipartite_bandwidth(matrix.values()); }

BipartiteGraph bipartite_graph(const DataMatrix& matrix, double gamma) {
    return bipartite_graph(matrix.values(), gamma);
}

BipartiteGraph bipartite_graph(const DenseMatrix& matrix, double gamma) {
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
    if (matrix.rows() == 0 || matrix.cols() == 0) throw DimensionError("empty data matrix");
    BipartiteGraph g;
    g.feature_means = feature_means(matrix);
    g.bandwidth = bandwidth_from_means(matrix, g.feature_means);
    const double scale = gamma / (g.bandwidth * g.bandwidth);
    g.weights = DenseMatrix(matrix.rows(), matrix.cols());
    for (std::size_t i = 0; i < matrix.rows(); ++i) {
        for (std::size_t j = 0; j < matrix.cols(); ++j) {
            const double dev = matrix(i, j) - g.feature_means[j];
            g.weights(i, j) = std::exp(-scale * dev * dev);
        }
    }
    ++g_constructions;
    return g;
}

DegreeVector degree_vector(const CsrMatrix& weights, Axis axis) {
    DegreeVector out{std::vector<double>(axis == Axis::Rows ? weights.rows() : weights.cols(), 0.0),
                     axis};
    for (std::size_t i = 0; i < weights.rows(); ++i) {
        const auto cols = weights.row_indices(i);
        const auto vals = weights.row_values(i);
        for (std::size_t p = 0; p < cols.size(); ++p)
            out.degrees[axis == Axis::Rows ? i : cols[p]] += vals[p];
    }
    return out;
}

DegreeVector degree_vector(const DenseMatrix& weights, Axis axis) {
    DegreeVector out{{}, axis};
    if (axis == Axis::Rows) {
        out.degrees.resize(weights.rows());
        for (std::size_t i = 0; i < weights.rows(); ++i) out.degrees[i] = kernels::sum(weights.row(i));
    } else {
        out.degrees.assign(weights.cols(), 0.0);
        for (std::size_t i = 0; i < weights.rows(); ++i) kernels::axpy(1.0, weights.row(i), out.degrees);
    }
    return out;
}

CsrMatrix normalized_affinity(const SimilarityGraph& graph) {
    const auto scale = inv_sqrt_degrees(degree_vector(graph.weights, Axis::Rows).degrees);
    CsrMatrix s = graph.weights;
    for (std::size_t i = 0; i < s.rows(); ++i) {
        const auto cols = s.row_indices(i);
        auto vals = s.row_values(i);
        for (std::size_t p = 0; p < cols.size(); ++p) vals[p] *= scale[i] * scale[cols[p]];
    }
    return s;
}

DualLaplacian dual_laplacian(const SimilarityGraph& a11, const SimilarityGraph& a22,
                             const BipartiteGraph& a12, double lambda2) {
    if (a12.weights.rows() != a11.size() || a12.weights.cols() != a22.size())
        throw DimensionError("bipartite block is " + std::to_string(a12.weights.rows()) + "x" +
                             std::to_string(a12.weights.cols()) + " but graphs have n=" +
                             std::to_string(a11.size()) + ", d=" + std::to_string(a22.size()));
    return DualLaplacian(normalized_affinity(a11), normalized_affinity(a22), normalized_bipartite(a12),
                         lambda2);
}

DenseMatrix normalized_bipartite(const BipartiteGraph& graph) {
    const auto du = inv_sqrt_degrees(degree_vector(graph.weights, Axis::Rows).degrees);
    const auto dv = inv_sqrt_degrees(degree_vector(graph.weights, Axis::Cols).degrees);
    DenseMatrix s12 = graph.weights;
    for (std::size_t i = 0; i < s12.rows(); ++i) {
        auto row = s12.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) row[j] *= du[i] * dv[j];
    }
    return s12;
}

DualLaplacian::DualLaplacian(CsrMatrix s11, CsrMatrix s22, DenseMatrix s12, double lambda2)
    : s11_(std::move(s11)), s22_(std::move(s22)), s12_(std::move(s12)), lambda2_(lambda2) {
    if (!(lambda2_ >= 0.0)) throw std::invalid_argument("lambda2 must be >= 0");
    if (s12_.rows() != s11_.rows() || s12_.cols() != s22_.rows())
        throw DimensionError("dual Laplacian blocks have inconsistent shapes");
}

DualLaplacian DualLaplacian::with_lambda2(double lambda2) const {
    DualLaplacian copy = *this;
    if (!(lambda2 >= 0.0)) throw std::invalid_argument("lambda2 must be >= 0");
    copy.lambda2_ = lambda2;
    return copy;
}

void DualLaplacian::s12_times(std::span<const double> v, std::span<double> out) const {
    s12_.multiply(v, out);
}

void DualLaplacian::s21_times(std::span<const double> u, std::span<double> out) const {
    s12_.multiply_transposed(u, out);
}

void DualLaplacian::apply(std::span<const double> u, std::span<const double> v,
                          std::span<double> out_u, std::span<double> out_v) const {
    std::vector<double> tu(n()), tv(d());
    s11_.multiply(u, out_u);
    s12_times(v, tu);
    for (std::size_t i = 0; i < n(); ++i) out_u[i] = 2.0 * u[i] - lambda2_ * (out_u[i] + tu[i]);
    s22_.multiply(v, out_v);
    s21_times(u, tv);
    for (std::size_t j = 0; j < d(); ++j) out_v[j] = 2.0 * v[j] - lambda2_ * (out_v[j] + tv[j]);
}

DenseMatrix DualLaplacian::to_dense() const {
    const std::size_t n_ = n(), d_ = d(), m = n_ + d_;
    DenseMatrix l(m, m);
    const DenseMatrix a = s11_.to_dense(), b = s22_.to_dense();
    for (std::size_t i = 0; i < m; ++i) l(i, i) = 2.0;
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < n_; ++j) l(i, j) -= lambda2_ * a(i, j);
    for (std::size_t i = 0; i < d_; ++i)
        for (std::size_t j = 0; j < d_; ++j) l(n_ + i, n_ + j) -= lambda2_ * b(i, j);
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < d_; ++j) {
            l(i, n_ + j) -= lambda2_ * s12_(i, j);
            l(n_ + j, i) -= lambda2_ * s12_(i, j);
        }
    return l;
}

void write_coo(std::ostream& out, const CsrMatrix& weights) {
    for (std::size_t i = 0; i < weights.rows(); ++i) {
        const auto cols = weights.row_indices(i);
        const auto vals = weights.row_values(i);
        for (std::size_t p = 0; p < cols.size(); ++p) out << i << ',' << cols[p] << ',' << vals[p] << '\n';
    }
}

void write_coo(std::ostream& out, const DenseMatrix& weights) {
    for (std::size_t i = 0; i < weights.rows(); ++i)
        for (std::size_t j = 0; j < weights.cols(); ++j)
            out << i << ',' << j << ',' << weights(i, j) << '\n';
}

}  // namespace dmrr::graphs
