#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "dmrr/graphs.hpp"
#include "dmrr/score_vector.hpp"
#include "dmrr/simplex_qp.hpp"

namespace dmrr::rerank {

struct RerankParams {
    double lambda1 = 1.0;
    double lambda2 = 0.0;
    double tol = 1e-6;  // relative change of the objective between sweeps
    std::size_t max_outer_iters = 300;
    qp::SolverOptions inner{};
};

/// Objective after every outer sweep; values[0] is the value at the uniform start.
struct ObjectiveTrace {
    std::vector<double> values;
    bool converged = false;
    std::size_t iterations = 0;
};

struct SelectionResult {
    std::vector<std::size_t> feature_order;  // descending score, ties by lower index
    std::vector<std::size_t> chosen;         // first m of feature_order
    ScoreVector scores;
};

struct DmrrResult {
    SelectionResult selection;
    ScoreVector sample_scores;
    ObjectiveTrace trace;
    bool sample_qp_indefinite = false;
    bool feature_qp_indefinite = false;
};

struct SfmrrResult {
    ScoreVector sample_scores;
    ScoreVector feature_scores;
    ObjectiveTrace trace;
};

/// A subproblem solve failed; carries the objective trace up to the failure.
class RerankError : public std::runtime_error {
public:
    RerankError(const std::string& what, ObjectiveTrace trace)
        : std::runtime_error(what), trace_(std::move(trace)) {}
    const ObjectiveTrace& trace() const noexcept { return trace_; }

private:
    ObjectiveTrace trace_;
};

/// argmin u^T (I - S11) u + lambda1 ||u - u0||^2 over the simplex.
ScoreVector smrr(const graphs::SimilarityGraph& sample_graph, const ScoreVector& u0, double lambda1,
                 const qp::SolverOptions& options = {});

/// Feature-side counterpart of smrr.
ScoreVector fmrr(const graphs::SimilarityGraph& feature_graph, const ScoreVector& v0, double lambda1,
                 const qp::SolverOptions& options = {});

/// Alternating minimization of
///   u^T u - 2 u^T S12 v + v^T v + lambda1 (||u - u0||^2 + ||v - v0||^2).
SfmrrResult sfmrr(const graphs::BipartiteGraph& bipartite, const ScoreVector& u0,
                  const ScoreVector& v0, double lambda1, double tol = 1e-6,
                  std::size_t max_outer_iters = 300, const qp::SolverOptions& options = {});

double sfmrr_objective(const DenseMatrix& s12, std::span<const double> u, std::span<const double> v,
                       std::span<const double> u0, std::span<const double> v0, double lambda1);

/// Dual manifold re-ranking: alternately solves the sample QP (fixed v) and
/// the feature QP (fixed, freshly updated u) until the objective settles.
/// params.lambda2 must equal laplacian.lambda2().
DmrrResult dmrr(const graphs::DualLaplacian& laplacian, const ScoreVector& u0, const ScoreVector& v0,
                const RerankParams& params);

/// [u;v]^T L [u;v] + lambda1 ||[u;v] - [u0;v0]||^2
double objective_value(const graphs::DualLaplacian& laplacian, std::span<const double> u,
                       std::span<const double> v, std::span<const double> u0,
                       std::span<const double> v0, double lambda1);

/// Indices sorted by descending value, ties by lower index.
std::vector<std::size_t> descending_order(std::span<const double> values);

/// Throws DimensionError unless 1 <= m <= v.size().
SelectionResult select_top_features(const ScoreVector& v, std::size_t m);

}  // namespace dmrr::rerank
