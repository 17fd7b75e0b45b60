#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "doctest.h"
#include "dmrr/error.hpp"
#include "dmrr/graphs.hpp"
#include "dmrr/init_scores.hpp"
#include "dmrr/rerank.hpp"
#include "support/oracles.hpp"

using namespace dmrr;
using namespace dmrr::rerank;
using graphs::Side;

namespace {

graphs::DualLaplacian build(const DataMatrix& x, double lambda2, std::size_t k = 5) {
    const graphs::GraphParams p{k, 8.0};
    return graphs::dual_laplacian(graphs::knn_gaussian_graph(x, Side::Sample, p),
                                  graphs::knn_gaussian_graph(x, Side::Feature, p), graphs::bipartite_graph(x, 8.0),
                                  lambda2);
}

ScoreVector random_simplex(std::mt19937_64& rng, std::size_t n, ScoreSide side) {
    std::exponential_distribution<double> e(1.0);
    std::vector<double> z(n);
    for (double& t : z) t = e(rng);
    const double s = std::accumulate(z.begin(), z.end(), 0.0);
    for (double& t : z) t /= s;
    return {z, side};
}

DataMatrix gaussian_data(std::mt19937_64& rng, std::size_t n, std::size_t d) {
    std::normal_distribution<double> g;
    DenseMatrix m(n, d);
    for (double& t : m.data()) t = g(rng);
    return DataMatrix(std::move(m));
}

graphs::SimilarityGraph complete_graph(std::size_t m) {
    std::vector<CsrMatrix::Entry> e;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            if (i != j) e.push_back({i, j, 1.0});
    return {CsrMatrix::from_triplets(m, m, e), 1.0, Side::Sample};
}

}  // namespace

TEST_SUITE("rerank") {
    TEST_CASE("single-graph variants") {
        const auto g = complete_graph(3);
        const auto uni = ScoreVector::uniform(3, ScoreSide::Sample);
        for (double v : smrr(g, uni, 1.0).values) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-8));

        const ScoreVector prior{{0.6, 0.3, 0.1}, ScoreSide::Sample};
        const auto stiff = smrr(g, prior, 1e8);
        for (std::size_t i = 0; i < 3; ++i) CHECK(std::fabs(stiff.values[i] - prior.values[i]) <= 1e-4);

        CHECK_THROWS_AS(smrr(g, uni, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(fmrr(g, ScoreVector::uniform(4, ScoreSide::Feature), 1.0), DimensionError);
        CHECK_THROWS_AS(smrr(g, ScoreVector{{0.5, 0.5, 0.5}, ScoreSide::Sample}, 1.0), std::invalid_argument);
    }

    TEST_CASE("single-graph variants match the dense oracle") {
        std::mt19937_64 rng(31);
        for (int trial = 0; trial < 20; ++trial) {
            const std::size_t d = 4;
            const auto x = gaussian_data(rng, 12, d);
            const auto graph = graphs::knn_gaussian_graph(x, Side::Feature, {2, 8.0});
            const auto prior = random_simplex(rng, d, ScoreSide::Feature);
            const double lambda = std::pow(10.0, static_cast<double>(rng() % 4));
            const auto v = fmrr(graph, prior, lambda);

            const DenseMatrix s = graphs::normalized_affinity(graph).to_dense();
            DenseMatrix a(d, d);
            std::vector<double> b(d);
            for (std::size_t i = 0; i < d; ++i) {
                for (std::size_t j = 0; j < d; ++j) a(i, j) = -s(i, j);
                a(i, i) += 1.0 + lambda;
                b[i] = -2.0 * lambda * prior.values[i];
            }
            const auto oracle = testing::active_set_oracle(a, b);
            CHECK(testing::quad_objective(a, b, v.values) - oracle.objective <= 1e-6);
            for (std::size_t i = 0; i < d; ++i) CHECK(std::fabs(v.values[i] - oracle.z[i]) <= 1e-4);
        }
    }

    TEST_CASE("coupled bipartite variant without coupling") {
        graphs::BipartiteGraph zero{DenseMatrix(3, 2), 1.0, {0.0, 0.0}};
        const ScoreVector u0{{0.7, 0.2, 0.1}, ScoreSide::Sample};
        const ScoreVector v0{{0.9, 0.1}, ScoreSide::Feature};
        const double lambda = 3.0, c = lambda / (1.0 + lambda);
        const auto r = sfmrr(zero, u0, v0, lambda);
        CHECK(r.trace.converged);
        for (std::size_t i = 0; i < 3; ++i)
            CHECK(r.sample_scores.values[i] == doctest::Approx(c * u0.values[i] + (1 - c) / 3).epsilon(1e-8));
        for (std::size_t j = 0; j < 2; ++j)
            CHECK(r.feature_scores.values[j] == doctest::Approx(c * v0.values[j] + (1 - c) / 2).epsilon(1e-8));
    }

    TEST_CASE("coupled bipartite variant against a grid search") {
        const auto bip = graphs::bipartite_graph(DenseMatrix(3, 2, {0.1, 2.0, 1.5, -1.0, 0.4, 0.3}), 8.0);
        const DenseMatrix s12 = graphs::normalized_bipartite(bip);
        const ScoreVector u0{{0.5, 0.3, 0.2}, ScoreSide::Sample};
        const ScoreVector v0{{0.2, 0.8}, ScoreSide::Feature};
        const double lambda = 0.5;
        const auto r = sfmrr(bip, u0, v0, lambda, 1e-10);
        const double found = sfmrr_objective(s12, r.sample_scores.values, r.feature_scores.values, u0.values,
                                             v0.values, lambda);
        double grid_best = 1e300;
        for (int a = 0; a <= 100; ++a)
            for (int b = 0; a + b <= 100; ++b) {
                const std::vector<double> u{a / 100.0, b / 100.0, (100 - a - b) / 100.0};
                for (int c = 0; c <= 100; ++c) {
                    const std::vector<double> v{c / 100.0, (100 - c) / 100.0};
                    grid_best = std::min(grid_best, sfmrr_objective(s12, u, v, u0.values, v0.values, lambda));
                }
            }
        CHECK(found <= grid_best + 1e-4);
        for (std::size_t k = 1; k < r.trace.values.size(); ++k)
            CHECK(r.trace.values[k] <= r.trace.values[k - 1] + 1e-12);
    }

    TEST_CASE("dmrr without coupling has a closed form") {
        std::mt19937_64 rng(41);
        for (int trial = 0; trial < 10; ++trial) {
            const std::size_t n = 8 + rng() % 20, d = 6 + rng() % 20;
            const auto x = gaussian_data(rng, n, d);
            const auto lap = build(x, 0.0, 3);
            const auto u0 = random_simplex(rng, n, ScoreSide::Sample);
            const auto v0 = random_simplex(rng, d, ScoreSide::Feature);
            RerankParams p;
            p.lambda1 = std::pow(10.0, static_cast<double>(rng() % 6));
            const auto r = rerank::dmrr(lap, u0, v0, p);
            const double c = p.lambda1 / (2.0 + p.lambda1);
            CHECK(r.trace.converged);
            for (std::size_t i = 0; i < n; ++i)
                CHECK(std::fabs(r.sample_scores.values[i] - (c * u0.values[i] + (1 - c) / n)) <= 1e-8);
            for (std::size_t j = 0; j < d; ++j)
                CHECK(std::fabs(r.selection.scores.values[j] - (c * v0.values[j] + (1 - c) / d)) <= 1e-8);
        }
    }

    TEST_CASE("uniform priors without coupling keep the index order") {
        std::mt19937_64 rng(4);
        const auto x = gaussian_data(rng, 10, 6);
        const auto r = rerank::dmrr(build(x, 0.0, 3), ScoreVector::uniform(10, ScoreSide::Sample),
                            ScoreVector::uniform(6, ScoreSide::Feature), {});
        CHECK(r.selection.feature_order == std::vector<std::size_t>{0, 1, 2, 3, 4, 5});
    }

    TEST_CASE("planted features rise to the top") {
        const auto p = testing::make_planted(40, 10, {3, 7}, 7);
        const DataMatrix x(p.values);
        const auto u0 = scores::initial_sample_scores(x);
        const auto v0 = ScoreVector::uniform(10, ScoreSide::Feature);
        for (double l1 : {1.0, 100.0})
            for (double l2 : {1.0, 10.0}) {
                RerankParams params;
                params.lambda1 = l1;
                params.lambda2 = l2;
                const auto r = rerank::dmrr(build(x, l2), u0, v0, params);
                CHECK(r.trace.converged);
                CHECK(r.trace.iterations <= 300);
                for (std::size_t k = 1; k < r.trace.values.size(); ++k)
                    CHECK(r.trace.values[k] <= r.trace.values[k - 1] + 1e-9 * std::fabs(r.trace.values[k - 1]));
                const std::set<std::size_t> top(r.selection.feature_order.begin(), r.selection.feature_order.begin() + 2);
                CHECK(top == std::set<std::size_t>{3, 7});
                CHECK(on_simplex(r.sample_scores.span()));
                CHECK(on_simplex(r.selection.scores.span()));
            }
    }

    TEST_CASE("objective value") {
        std::mt19937_64 rng(13);
        const auto x = gaussian_data(rng, 7, 5);
        const auto lap = build(x, 2.5, 2);
        const auto u = random_simplex(rng, 7, ScoreSide::Sample), v = random_simplex(rng, 5, ScoreSide::Feature);
        const auto u0 = random_simplex(rng, 7, ScoreSide::Sample), v0 = random_simplex(rng, 5, ScoreSide::Feature);
        const DenseMatrix l = lap.to_dense();
        std::vector<double> w(u.values);
        w.insert(w.end(), v.values.begin(), v.values.end());
        double expect = 0.0;
        for (std::size_t i = 0; i < 12; ++i)
            for (std::size_t j = 0; j < 12; ++j) expect += w[i] * l(i, j) * w[j];
        double fit = 0.0;
        for (std::size_t i = 0; i < 7; ++i) fit += std::pow(u.values[i] - u0.values[i], 2);
        for (std::size_t j = 0; j < 5; ++j) fit += std::pow(v.values[j] - v0.values[j], 2);
        expect += 3.0 * fit;
        CHECK(objective_value(lap, u.values, v.values, u0.values, v0.values, 3.0) == doctest::Approx(expect).epsilon(1e-12));

        // lambda2 = 0, priors equal to the point: F = 2(|u|^2 + |v|^2)
        const auto lap0 = lap.with_lambda2(0.0);
        const std::vector<double> uu{0.5, 0.5, 0, 0, 0, 0, 0}, vv{1, 0, 0, 0, 0};
        CHECK(objective_value(lap0, uu, vv, uu, vv, 7.0) == doctest::Approx(3.0));
    }

    TEST_CASE("top feature selection") {
        const ScoreVector v{{0.1, 0.5, 0.4}, ScoreSide::Feature};
        const auto s = select_top_features(v, 2);
        CHECK(s.chosen == std::vector<std::size_t>{1, 2});
        CHECK(s.feature_order == std::vector<std::size_t>{1, 2, 0});
        const auto ties = select_top_features(ScoreVector::uniform(4, ScoreSide::Feature), 2);
        CHECK(ties.chosen == std::vector<std::size_t>{0, 1});
        CHECK_THROWS_AS(select_top_features(v, 0), DimensionError);
        CHECK_THROWS_AS(select_top_features(v, 4), DimensionError);
    }

    TEST_CASE("argument checks") {
        std::mt19937_64 rng(1);
        const auto x = gaussian_data(rng, 6, 4);
        const auto lap = build(x, 1.0, 2);
        RerankParams p;
        p.lambda2 = 2.0;
        const auto u0 = ScoreVector::uniform(6, ScoreSide::Sample);
        const auto v0 = ScoreVector::uniform(4, ScoreSide::Feature);
        CHECK_THROWS_AS(rerank::dmrr(lap, u0, v0, p), std::invalid_argument);
        p.lambda2 = 1.0;
        CHECK_THROWS_AS(rerank::dmrr(lap, v0, u0, p), DimensionError);
        p.lambda1 = -1.0;
        CHECK_THROWS_AS(rerank::dmrr(lap, u0, v0, p), std::invalid_argument);
    }

    TEST_CASE("feature permutation carries through") {
        std::mt19937_64 rng(77);
        for (int trial = 0; trial < 5; ++trial) {
            const std::size_t n = 20, d = 12;
            const auto x = gaussian_data(rng, n, d);
            std::vector<std::size_t> perm(d);
            std::iota(perm.begin(), perm.end(), 0);
            std::shuffle(perm.begin(), perm.end(), rng);
            DenseMatrix px(n, d);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < d; ++j) px(i, perm[j]) = x(i, j);
            const auto v0 = random_simplex(rng, d, ScoreSide::Feature);
            ScoreVector pv0{std::vector<double>(d), ScoreSide::Feature};
            for (std::size_t j = 0; j < d; ++j) pv0.values[perm[j]] = v0.values[j];
            const auto u0 = scores::initial_sample_scores(x);

            RerankParams params;
            params.lambda1 = 10.0;
            params.lambda2 = 1.0;
            const auto a = rerank::dmrr(build(x, 1.0, 3), u0, v0, params);
            const auto b = rerank::dmrr(build(DataMatrix(px), 1.0, 3), u0, pv0, params);
            for (std::size_t j = 0; j < d; ++j)
                CHECK(std::fabs(a.selection.scores.values[j] - b.selection.scores.values[perm[j]]) <= 1e-6);
            const auto& order = a.selection.feature_order;
            for (std::size_t m = 1; m < d; ++m) {
                if (a.selection.scores.values[order[m - 1]] - a.selection.scores.values[order[m]] < 1e-5) continue;
                std::set<std::size_t> sa, sb;
                for (std::size_t k = 0; k < m; ++k) {
                    sa.insert(perm[order[k]]);
                    sb.insert(b.selection.feature_order[k]);
                }
                CHECK(sa == sb);
            }
        }
    }
}
