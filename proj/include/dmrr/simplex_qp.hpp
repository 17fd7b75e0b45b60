#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dmrr/matrix.hpp"
#include "dmrr/score_vector.hpp"

namespace dmrr::qp {

/// Symmetric linear operator z -> A z defining the quadratic term z^T A z.
class QuadraticOperator {
public:
    virtual ~QuadraticOperator() = default;
    virtual std::size_t dim() const noexcept = 0;
    virtual void apply(std::span<const double> z, std::span<double> out) const = 0;
};

/// Explicit symmetric matrix; intended for small instances.
class DenseQuadratic final : public QuadraticOperator {
public:
    explicit DenseQuadratic(DenseMatrix a);
    std::size_t dim() const noexcept override { return a_.rows(); }
    void apply(std::span<const double> z, std::span<double> out) const override;
    const DenseMatrix& matrix() const noexcept { return a_; }

private:
    DenseMatrix a_;
};

/// Matrix-free alpha*I - beta*S for a symmetric sparse affinity S.
class ShiftedAffinity final : public QuadraticOperator {
public:
    ShiftedAffinity(double alpha, double beta, const CsrMatrix& s);
    std::size_t dim() const noexcept override { return s_->rows(); }
    void apply(std::span<const double> z, std::span<double> out) const override;

private:
    double alpha_;
    double beta_;
    const CsrMatrix* s_;
};

/// alpha*I.
class ScaledIdentity final : public QuadraticOperator {
public:
    ScaledIdentity(std::size_t dim, double alpha) : dim_(dim), alpha_(alpha) {}
    std::size_t dim() const noexcept override { return dim_; }
    void apply(std::span<const double> z, std::span<double> out) const override {
        for (std::size_t i = 0; i < dim_; ++i) out[i] = alpha_ * z[i];
    }

private:
    std::size_t dim_;
    double alpha_;
};

/// Power-iteration estimates for a symmetric operator.
struct SpectrumEstimate {
    double norm = 0.0;     // largest |eigenvalue|
    double min_eig = 0.0;  // smallest eigenvalue
    bool indefinite() const noexcept;
};

SpectrumEstimate estimate_spectrum(const QuadraticOperator& op, std::size_t max_iters = 1000,
                                   double rel_tol = 1e-12);

/// min z^T A z + z^T b subject to z on the probability simplex.
struct QpSubproblem {
    const QuadraticOperator& quad;
    std::vector<double> linear;
};

struct SolverOptions {
    double tol = 1e-8;
    std::size_t max_iters = 10000;
    bool record_objective = false;
};

struct SolverReport {
    ScoreVector solution;
    std::size_t iterations = 0;
    /// Infinity norm of the projected-gradient step divided by the step size.
    double final_gradient_residual = 0.0;
    bool converged = false;
    bool indefinite = false;
    double objective = 0.0;
    std::vector<double> objective_trace;  // filled when record_objective
};

/// Euclidean projection onto {z >= 0, sum z = 1} by the sort-and-threshold method.
ScoreVector project_simplex(std::span<const double> y, ScoreSide side = ScoreSide::Feature);
/// In-place variant; `scratch` is resized as needed.
void project_simplex_inplace(std::span<double> y, std::vector<double>& scratch);

double objective(const QuadraticOperator& quad, std::span<const double> linear,
                 std::span<const double> z);

/// Projected gradient z <- P(z - eta (2 A z + b)), eta = 1 / (2 ||A||), with
/// step halving whenever the objective would increase. Stops when an accepted
/// step moves no coordinate by more than `tol`. `spectrum` may be passed to
/// reuse an estimate across calls with the same operator.
SolverReport solve_simplex_qp(const QpSubproblem& problem, const ScoreVector& start,
                              const SolverOptions& options = {},
                              const SpectrumEstimate* spectrum = nullptr);

}  // namespace dmrr::qp
