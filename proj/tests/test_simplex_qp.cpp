#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "dmrr/error.hpp"
#include "dmrr/simplex_qp.hpp"
#include "support/oracles.hpp"

using namespace dmrr;
using namespace dmrr::qp;

namespace {

DenseMatrix identity(std::size_t n, double scale = 1.0) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = scale;
    return m;
}

}  // namespace

TEST_SUITE("simplex_qp") {
    TEST_CASE("projection examples") {
        const auto a = project_simplex(std::vector<double>{0.2, 0.3, 0.5});
        CHECK(a.values[0] == doctest::Approx(0.2));
        CHECK(a.values[1] == doctest::Approx(0.3));
        CHECK(a.values[2] == doctest::Approx(0.5));

        const auto b = project_simplex(std::vector<double>{0.6, 0.4, 0.4});
        CHECK(b.values[0] == doctest::Approx(0.4666666666666667).epsilon(1e-12));
        CHECK(b.values[1] == doctest::Approx(0.2666666666666667).epsilon(1e-12));
        CHECK(b.values[2] == doctest::Approx(0.2666666666666667).epsilon(1e-12));

        const auto c = project_simplex(std::vector<double>{5.0, -1.0, -1.0});
        CHECK(c.values == std::vector<double>{1.0, 0.0, 0.0});

        CHECK_THROWS_AS(project_simplex(std::vector<double>{}), DimensionError);
        CHECK_THROWS_AS(project_simplex(std::vector<double>{1.0, std::nan("")}), NumericalError);
    }

    TEST_CASE("projection invariants") {
        std::mt19937_64 rng(8);
        std::normal_distribution<double> g(0.0, 3.0);
        for (int trial = 0; trial < 500; ++trial) {
            std::vector<double> y(1 + rng() % 40);
            for (double& t : y) t = g(rng);
            const auto p = project_simplex(y);
            CHECK(on_simplex(p.span(), 1e-12));
            const auto q = project_simplex(p.values);
            for (std::size_t i = 0; i < y.size(); ++i) CHECK(std::fabs(p.values[i] - q.values[i]) <= 1e-12);
            // optimality: (y - p)^T (z - p) <= 0 for the vertices z = e_k
            for (std::size_t k = 0; k < y.size(); ++k) {
                double inner = 0.0;
                for (std::size_t i = 0; i < y.size(); ++i)
                    inner += (y[i] - p.values[i]) * ((i == k ? 1.0 : 0.0) - p.values[i]);
                CHECK(inner <= 1e-10);
            }
        }
    }

    TEST_CASE("identity examples") {
        const DenseQuadratic a(identity(3));
        const auto start = ScoreVector::uniform(3, ScoreSide::Feature);
        const auto r0 = solve_simplex_qp({a, {0, 0, 0}}, start);
        CHECK(r0.converged);
        for (double v : r0.solution.values) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-8));

        const auto r1 = solve_simplex_qp({a, {-2, 0, 0}}, start);
        CHECK(r1.converged);
        CHECK(r1.solution.values[0] == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(r1.solution.values[1] == doctest::Approx(0.0).epsilon(1e-8));
        CHECK(r1.solution.values[2] == doctest::Approx(0.0).epsilon(1e-8));
    }

    TEST_CASE("random instances match the active-set oracle") {
        std::mt19937_64 rng(2024);
        std::normal_distribution<double> g(0.0, 1.0);
        SolverOptions opts;
        opts.record_objective = true;
        for (int trial = 0; trial < 200; ++trial) {
            const std::size_t dim = 2 + rng() % 5;
            const auto a = testing::random_psd(rng, dim, 1 + rng() % (dim + 2));
            std::vector<double> b(dim);
            for (double& t : b) t = 2.0 * g(rng);
            const DenseQuadratic op(a);
            const auto rep = solve_simplex_qp({op, b}, ScoreVector::uniform(dim, ScoreSide::Feature), opts);
            const auto oracle = testing::active_set_oracle(a, b);
            CHECK(rep.converged);
            CHECK_FALSE(rep.indefinite);
            CHECK(on_simplex(rep.solution.span()));
            CHECK(rep.objective - oracle.objective <= 1e-6);
            for (std::size_t k = 1; k < rep.objective_trace.size(); ++k)
                CHECK(rep.objective_trace[k] <= rep.objective_trace[k - 1] + 1e-12 * (1 + std::fabs(rep.objective_trace[k - 1])));

            // KKT: gradient entries on the support are equal and minimal
            std::vector<double> grad(dim);
            op.apply(rep.solution.values, grad);
            for (std::size_t i = 0; i < dim; ++i) grad[i] = 2 * grad[i] + b[i];
            const double gmin = *std::min_element(grad.begin(), grad.end());
            for (std::size_t i = 0; i < dim; ++i)
                if (rep.solution.values[i] > 1e-6) CHECK(grad[i] - gmin <= 1e-4);
        }
    }

    TEST_CASE("adding a multiple of the ones vector to b does not move the minimizer") {
        std::mt19937_64 rng(99);
        std::normal_distribution<double> g(0.0, 1.0);
        for (int trial = 0; trial < 30; ++trial) {
            const std::size_t dim = 3 + rng() % 4;
            DenseMatrix a = testing::random_psd(rng, dim, dim + 1);
            for (std::size_t i = 0; i < dim; ++i) a(i, i) += 0.5;  // strictly convex
            std::vector<double> b(dim), b2(dim);
            const double c = 10.0 * g(rng);
            for (std::size_t i = 0; i < dim; ++i) {
                b[i] = g(rng);
                b2[i] = b[i] + c;
            }
            const DenseQuadratic op(a);
            const auto start = ScoreVector::uniform(dim, ScoreSide::Feature);
            const auto r1 = solve_simplex_qp({op, b}, start);
            const auto r2 = solve_simplex_qp({op, b2}, start);
            for (std::size_t i = 0; i < dim; ++i) CHECK(std::fabs(r1.solution.values[i] - r2.solution.values[i]) <= 1e-6);
        }
    }

    TEST_CASE("spectrum estimate and indefinite flag") {
        const DenseQuadratic pos(DenseMatrix(2, 2, {2, 0, 0, 1}));
        const auto s = estimate_spectrum(pos);
        CHECK(s.norm == doctest::Approx(2.0).epsilon(1e-8));
        CHECK(s.min_eig == doctest::Approx(1.0).epsilon(1e-6));
        CHECK_FALSE(s.indefinite());

        const DenseQuadratic neg(DenseMatrix(2, 2, {1, 0, 0, -1}));
        CHECK(estimate_spectrum(neg).indefinite());
        const auto rep = solve_simplex_qp({neg, {0, 0}}, ScoreVector::uniform(2, ScoreSide::Feature));
        CHECK(rep.indefinite);
        CHECK(on_simplex(rep.solution.span()));
        // the minimum over the simplex sits at the vertex with the negative curvature
        CHECK(rep.solution.values[1] == doctest::Approx(1.0).epsilon(1e-8));
    }

    TEST_CASE("matrix-free operators") {
        const auto s = CsrMatrix::from_triplets(2, 2, {{0, 1, 1.0}, {1, 0, 1.0}});
        const ShiftedAffinity op(3.0, 2.0, s);
        std::vector<double> out(2);
        op.apply(std::vector<double>{1.0, 2.0}, out);
        CHECK(out == std::vector<double>{-1.0, 4.0});
        const ScaledIdentity id(2, 4.0);
        id.apply(std::vector<double>{1.0, 2.0}, out);
        CHECK(out == std::vector<double>{4.0, 8.0});
    }

    TEST_CASE("error paths") {
        const DenseQuadratic a(identity(2));
        const auto start = ScoreVector::uniform(2, ScoreSide::Feature);
        CHECK_THROWS_AS(solve_simplex_qp({a, {0, 0, 0}}, start), DimensionError);
        CHECK_THROWS_AS(solve_simplex_qp({a, {std::numeric_limits<double>::infinity(), 0}}, start), NumericalError);
        SolverOptions bad;
        bad.tol = 0.0;
        CHECK_THROWS_AS(solve_simplex_qp({a, {0, 0}}, start, bad), std::invalid_argument);
        CHECK_THROWS_AS(DenseQuadratic(DenseMatrix(2, 3)), DimensionError);
    }
}
