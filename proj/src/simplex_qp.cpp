#include "dmrr/simplex_qp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "dmrr/error.hpp"
#include "dmrr/kernels.hpp"

namespace dmrr::qp {

DenseQuadratic::DenseQuadratic(DenseMatrix a) : a_(std::move(a)) {
    if (a_.rows() != a_.cols() || a_.rows() == 0)
        throw DimensionError("quadratic term must be a non-empty square matrix");
}

void DenseQuadratic::apply(std::span<const double> z, std::span<double> out) const {
    a_.multiply(z, out);
}

ShiftedAffinity::ShiftedAffinity(double alpha, double beta, const CsrMatrix& s)
    : alpha_(alpha), beta_(beta), s_(&s) {
    if (s.rows() != s.cols() || s.rows() == 0)
        throw DimensionError("affinity must be a non-empty square matrix");
}

void ShiftedAffinity::apply(std::span<const double> z, std::span<double> out) const {
    s_->multiply(z, out);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = alpha_ * z[i] - beta_ * out[i];
}

bool SpectrumEstimate::indefinite() const noexcept {
    return min_eig < -1e-9 * std::max(1.0, norm);
}

namespace {

// Largest |eigenvalue| of a symmetric operator, by power iteration on a fixed
// pseudo-random start vector.
double power_norm(std::size_t n, const std::function<void(std::span<const double>, std::span<double>)>& apply,
                  std::size_t max_iters, double rel_tol) {
    std::vector<double> x(n), y(n);
    std::uint64_t state = 0x9E3779B97F4A7C15ull;
    for (double& xi : x) {
        state += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        z ^= z >> 31;
        xi = 0.5 + static_cast<double>(z >> 11) * 0x1.0p-53;
    }
    double nx = std::sqrt(kernels::dot(x, x));
    for (double& xi : x) xi /= nx;

    double estimate = 0.0;
    for (std::size_t it = 0; it < max_iters; ++it) {
        apply(x, y);
        const double ny = std::sqrt(kernels::dot(y, y));
        if (!std::isfinite(ny)) throw NumericalError("power iteration produced a non-finite norm");
        if (ny == 0.0) return 0.0;
        const bool done = std::fabs(ny - estimate) <= rel_tol * ny;
        estimate = ny;
        for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / ny;
        if (done) break;
    }
    return estimate;
}

}  // namespace

SpectrumEstimate estimate_spectrum(const QuadraticOperator& op, std::size_t max_iters, double rel_tol) {
    const std::size_t n = op.dim();
    SpectrumEstimate est;
    est.norm = power_norm(
        n, [&](std::span<const double> x, std::span<double> y) { op.apply(x, y); }, max_iters, rel_tol);
    // norm*I - A is positive semidefinite; its top eigenvalue is norm - min_eig.
    const double shift = est.norm;
    const double top = power_norm(
        n,
        [&](std::span<const double> x, std::span<double> y) {
            op.apply(x, y);
            for (std::size_t i = 0; i < n; ++i) y[i] = shift * x[i] - y[i];
        },
        max_iters, rel_tol);
    est.min_eig = shift - top;
    return est;
}

void project_simplex_inplace(std::span<double> y, std::vector<double>& scratch) {
    const std::size_t n = y.size();
    scratch.assign(y.begin(), y.end());
    std::sort(scratch.begin(), scratch.end(), std::greater<>());
    double cumsum = 0.0, theta = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        cumsum += scratch[r];
        const double t = (cumsum - 1.0) / static_cast<double>(r + 1);
        if (scratch[r] - t > 0.0) theta = t;
    }
    for (double& yi : y) yi = std::max(yi - theta, 0.0);
}

ScoreVector project_simplex(std::span<const double> y, ScoreSide side) {
    if (y.empty()) throw DimensionError("cannot project an empty vector onto the simplex");
    for (double v : y)
        if (!std::isfinite(v)) throw NumericalError("simplex projection of a non-finite vector");
    ScoreVector out{{y.begin(), y.end()}, side};
    std::vector<double> scratch;
    project_simplex_inplace(out.values, scratch);
    return out;
}

double objective(const QuadraticOperator& quad, std::span<const double> linear,
                 std::span<const double> z) {
    std::vector<double> az(z.size());
    quad.apply(z, az);
    return kernels::dot(z, az) + kernels::dot(z, linear);
}

SolverReport solve_simplex_qp(const QpSubproblem& problem, const ScoreVector& start,
                              const SolverOptions& options, const SpectrumEstimate* spectrum) {
    const QuadraticOperator& quad = problem.quad;
    const std::size_t n = quad.dim();
    if (problem.linear.size() != n || start.size() != n)
        throw DimensionError("QP dimension mismatch: operator " + std::to_string(n) + ", linear " +
                             std::to_string(problem.linear.size()) + ", start " +
                             std::to_string(start.size()));
    if (!(options.tol > 0.0)) throw std::invalid_argument("solver tolerance must be positive");

    const SpectrumEstimate est = spectrum ? *spectrum : estimate_spectrum(quad);
    const std::span<const double> b = problem.linear;

    SolverReport report;
    report.indefinite = est.indefinite();

    std::vector<double> scratch;
    std::vector<double> z = start.values;
    if (!on_simplex(z)) project_simplex_inplace(z, scratch);

    std::vector<double> az(n), trial(n), az_trial(n);
    quad.apply(z, az);
    double f = kernels::dot(z, az) + kernels::dot(z, b);
    if (!std::isfinite(f)) throw NumericalError("QP objective is non-finite at the start point");
    if (options.record_objective) report.objective_trace.push_back(f);

    double eta = 1.0 / (2.0 * std::max(est.norm, 1e-12));
    double step = 0.0;
    for (std::size_t it = 0; it < options.max_iters; ++it) {
        double f_trial = 0.0;
        bool accepted = false;
        for (int halvings = 0; halvings <= 60; ++halvings) {
            for (std::size_t i = 0; i < n; ++i) trial[i] = z[i] - eta * (2.0 * az[i] + b[i]);
            project_simplex_inplace(trial, scratch);
            quad.apply(trial, az_trial);
            f_trial = kernels::dot(trial, az_trial) + kernels::dot(trial, b);
            if (!std::isfinite(f_trial)) {
                std::ostringstream msg;
                msg << "QP objective became non-finite at iteration " << it << " (last objective " << f
                    << ", step size " << eta << ")";
                throw NumericalError(msg.str());
            }
            if (f_trial <= f + 1e-14 * (1.0 + std::fabs(f))) {
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        if (!accepted) {
            // no descent even at a vanishing step: z is stationary to rounding
            step = 0.0;
            report.converged = true;
            break;
        }
        step = kernels::max_abs_diff(trial, z);
        z.swap(trial);
        az.swap(az_trial);
        f = f_trial;
        ++report.iterations;
        if (options.record_objective) report.objective_trace.push_back(f);
        if (step <= options.tol) {
            report.converged = true;
            break;
        }
    }
    report.final_gradient_residual = step / eta;
    report.objective = f;
    report.solution = ScoreVector{std::move(z), start.side};
    return report;
}

}  // namespace dmrr::qp
