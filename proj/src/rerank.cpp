#include "dmrr/rerank.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dmrr/error.hpp"
#include "dmrr/kernels.hpp"

namespace dmrr::rerank {
namespace {

void require_simplex(const ScoreVector& z, const char* name) {
    if (!on_simplex(z.values)) throw std::invalid_argument(std::string(name) + " is not on the simplex");
}

double sq_norm(std::span<const double> a) { return kernels::dot(a, a); }

// |F(t) - F(t-1)| / |F(t-1)|, falling back to the absolute change at F(t-1) = 0.
double relative_change(double current, double previous) {
    const double diff = std::fabs(current - previous);
    return previous != 0.0 ? diff / std::fabs(previous) : diff;
}

std::vector<double> prior_term(const ScoreVector& prior, double lambda1) {
    std::vector<double> b(prior.size());
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = -2.0 * lambda1 * prior.values[i];
    return b;
}

ScoreVector single_graph_rerank(const graphs::SimilarityGraph& graph, const ScoreVector& prior,
                                double lambda1, const qp::SolverOptions& options) {
    if (!(lambda1 > 0.0)) throw std::invalid_argument("lambda1 must be positive");
    if (graph.size() != prior.size())
        throw DimensionError("graph has " + std::to_string(graph.size()) + " nodes, prior has " +
                             std::to_string(prior.size()) + " entries");
    require_simplex(prior, "prior");
    const CsrMatrix s = graphs::normalized_affinity(graph);
    const qp::ShiftedAffinity quad(1.0 + lambda1, 1.0, s);
    const qp::QpSubproblem problem{quad, prior_term(prior, lambda1)};
    return qp::solve_simplex_qp(problem, prior, options).solution;
}

}  // namespace

ScoreVector smrr(const graphs::SimilarityGraph& sample_graph, const ScoreVector& u0, double lambda1,
                 const qp::SolverOptions& options) {
    return single_graph_rerank(sample_graph, u0, lambda1, options);
}

ScoreVector fmrr(const graphs::SimilarityGraph& feature_graph, const ScoreVector& v0, double lambda1,
                 const qp::SolverOptions& options) {
    return single_graph_rerank(feature_graph, v0, lambda1, options);
}

double sfmrr_objective(const DenseMatrix& s12, std::span<const double> u, std::span<const double> v,
                       std::span<const double> u0, std::span<const double> v0, double lambda1) {
    std::vector<double> sv(u.size());
    s12.multiply(v, sv);
    double fit = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) fit += (u[i] - u0[i]) * (u[i] - u0[i]);
    for (std::size_t j = 0; j < v.size(); ++j) fit += (v[j] - v0[j]) * (v[j] - v0[j]);
    return sq_norm(u) - 2.0 * kernels::dot(u, sv) + sq_norm(v) + lambda1 * fit;
}

SfmrrResult sfmrr(const graphs::BipartiteGraph& bipartite, const ScoreVector& u0,
                  const ScoreVector& v0, double lambda1, double tol, std::size_t max_outer_iters,
                  const qp::SolverOptions& options) {
    if (!(lambda1 > 0.0)) throw std::invalid_argument("lambda1 must be positive");
    const std::size_t n = bipartite.weights.rows(), d = bipartite.weights.cols();
    if (u0.size() != n || v0.size() != d) throw DimensionError("prior sizes do not match the bipartite graph");
    require_simplex(u0, "u0");
    require_simplex(v0, "v0");

    const DenseMatrix s12 = graphs::normalized_bipartite(bipartite);
    const qp::ScaledIdentity quad_u(n, 1.0 + lambda1), quad_v(d, 1.0 + lambda1);

    SfmrrResult out{ScoreVector::uniform(n, ScoreSide::Sample), ScoreVector::uniform(d, ScoreSide::Feature),
                    {}};
    auto& u = out.sample_scores;
    auto& v = out.feature_scores;
    double previous = sfmrr_objective(s12, u.values, v.values, u0.values, v0.values, lambda1);
    out.trace.values.push_back(previous);

    std::vector<double> bu(n), bv(d);
    for (std::size_t t = 0; t < max_outer_iters; ++t) {
        s12.multiply(v.values, bu);
        for (std::size_t i = 0; i < n; ++i) bu[i] = -2.0 * bu[i] - 2.0 * lambda1 * u0.values[i];
        u = qp::solve_simplex_qp({quad_u, bu}, u, options).solution;

        s12.multiply_transposed(u.values, bv);
        for (std::size_t j = 0; j < d; ++j) bv[j] = -2.0 * bv[j] - 2.0 * lambda1 * v0.values[j];
        v = qp::solve_simplex_qp({quad_v, bv}, v, options).solution;

        const double current = sfmrr_objective(s12, u.values, v.values, u0.values, v0.values, lambda1);
        out.trace.values.push_back(current);
        out.trace.iterations = t + 1;
        if (relative_change(current, previous) < tol) {
            out.trace.converged = true;
            break;
        }
        previous = current;
    }
    return out;
}

double objective_value(const graphs::DualLaplacian& laplacian, std::span<const double> u,
                       std::span<const double> v, std::span<const double> u0,
                       std::span<const double> v0, double lambda1) {
    std::vector<double> su(u.size()), s12v(u.size()), sv(v.size());
    laplacian.s11().multiply(u, su);
    laplacian.s12_times(v, s12v);
    laplacian.s22().multiply(v, sv);
    double fit = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) fit += (u[i] - u0[i]) * (u[i] - u0[i]);
    for (std::size_t j = 0; j < v.size(); ++j) fit += (v[j] - v0[j]) * (v[j] - v0[j]);
    const double coupling = kernels::dot(u, su) + 2.0 * kernels::dot(u, s12v) + kernels::dot(v, sv);
    return 2.0 * (sq_norm(u) + sq_norm(v)) - laplacian.lambda2() * coupling + lambda1 * fit;
}

DmrrResult dmrr(const graphs::DualLaplacian& laplacian, const ScoreVector& u0, const ScoreVector& v0,
                const RerankParams& params) {
    if (!(params.lambda1 > 0.0)) throw std::invalid_argument("lambda1 must be positive");
    if (!(params.tol > 0.0)) throw std::invalid_argument("outer tolerance must be positive");
    if (params.lambda2 != laplacian.lambda2())
        throw std::invalid_argument("RerankParams.lambda2 differs from the Laplacian's lambda2");
    const std::size_t n = laplacian.n(), d = laplacian.d();
    if (u0.size() != n || v0.size() != d)
        throw DimensionError("prior sizes (" + std::to_string(u0.size()) + ", " + std::to_string(v0.size()) +
                             ") do not match n=" + std::to_string(n) + ", d=" + std::to_string(d));
    require_simplex(u0, "u0");
    require_simplex(v0, "v0");

    const double alpha = 2.0 + params.lambda1;
    const double lambda2 = params.lambda2;
    const qp::ShiftedAffinity quad_u(alpha, lambda2, laplacian.s11());
    const qp::ShiftedAffinity quad_v(alpha, lambda2, laplacian.s22());
    const qp::SpectrumEstimate spec_u = qp::estimate_spectrum(quad_u);
    const qp::SpectrumEstimate spec_v = qp::estimate_spectrum(quad_v);

    DmrrResult result;
    result.sample_qp_indefinite = spec_u.indefinite();
    result.feature_qp_indefinite = spec_v.indefinite();

    ScoreVector u = ScoreVector::uniform(n, ScoreSide::Sample);
    ScoreVector v = ScoreVector::uniform(d, ScoreSide::Feature);
    ObjectiveTrace& trace = result.trace;
    double previous = objective_value(laplacian, u.values, v.values, u0.values, v0.values, params.lambda1);
    trace.values.push_back(previous);

    ScoreVector best_u = u, best_v = v;
    double best = previous;

    std::vector<double> bu(n), bv(d);
    for (std::size_t t = 0; t < params.max_outer_iters; ++t) {
        try {
            laplacian.s12_times(v.values, bu);
            for (std::size_t i = 0; i < n; ++i)
                bu[i] = -2.0 * lambda2 * bu[i] - 2.0 * params.lambda1 * u0.values[i];
            u = qp::solve_simplex_qp({quad_u, bu}, u, params.inner, &spec_u).solution;

            laplacian.s21_times(u.values, bv);
            for (std::size_t j = 0; j < d; ++j)
                bv[j] = -2.0 * lambda2 * bv[j] - 2.0 * params.lambda1 * v0.values[j];
            v = qp::solve_simplex_qp({quad_v, bv}, v, params.inner, &spec_v).solution;
        } catch (const std::exception& e) {
            throw RerankError("outer iteration " + std::to_string(t + 1) + ": " + e.what(), trace);
        }

        const double current =
            objective_value(laplacian, u.values, v.values, u0.values, v0.values, params.lambda1);
        trace.values.push_back(current);
        trace.iterations = t + 1;
        if (current < best) {
            best = current;
            best_u = u;
            best_v = v;
        }
        if (relative_change(current, previous) < params.tol) {
            trace.converged = true;
            break;
        }
        previous = current;
    }
    if (!trace.converged) {
        u = std::move(best_u);
        v = std::move(best_v);
    }

    result.selection.feature_order = descending_order(v.values);
    result.selection.scores = std::move(v);
    result.sample_scores = std::move(u);
    return result;
}

std::vector<std::size_t> descending_order(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    return order;
}

SelectionResult select_top_features(const ScoreVector& v, std::size_t m) {
    if (m < 1 || m > v.size())
        throw DimensionError("feature count m=" + std::to_string(m) + " must be in [1, " +
                             std::to_string(v.size()) + "]");
    SelectionResult out;
    out.feature_order = descending_order(v.values);
    out.chosen.assign(out.feature_order.begin(), out.feature_order.begin() + static_cast<std::ptrdiff_t>(m));
    out.scores = v;
    return out;
}

}  // namespace dmrr::rerank
