#include "dmrr/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <string>

#include "dmrr/error.hpp"
#include "dmrr/kernels.hpp"

namespace dmrr::eval {
namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t weighted_pick(std::mt19937_64& rng, std::span<const double> weights, double total) {
    double r = uniform01(rng) * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] <= 0.0) continue;
        if (r < weights[i]) return i;
        r -= weights[i];
    }
    for (std::size_t i = weights.size(); i-- > 0;)
        if (weights[i] > 0.0) return i;
    return 0;
}

void check_lengths(std::span<const int> pred, std::span<const int> truth) {
    if (pred.size() != truth.size())
        throw DimensionError("label lengths differ: " + std::to_string(pred.size()) + " vs " +
                             std::to_string(truth.size()));
    if (pred.empty()) throw DimensionError("cannot score an empty labeling");
}

// Dense relabeling to 0..k-1 (first appearance) so arbitrary ids are accepted.
std::vector<std::size_t> densify(std::span<const int> labels, std::size_t& k) {
    std::map<int, std::size_t> index;
    std::vector<std::size_t> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto [it, inserted] = index.try_emplace(labels[i], index.size());
        out[i] = it->second;
    }
    k = index.size();
    return out;
}

// counts(cluster, class)
DenseMatrix contingency(std::span<const int> pred, std::span<const int> truth) {
    std::size_t kp = 0, kt = 0;
    const auto p = densify(pred, kp);
    const auto t = densify(truth, kt);
    DenseMatrix table(kp, kt);
    for (std::size_t i = 0; i < p.size(); ++i) table(p[i], t[i]) += 1.0;
    return table;
}

}  // namespace

ClusteringRun kmeans(const DenseMatrix& data, std::size_t c, std::uint64_t seed, std::size_t max_iters) {
    const std::size_t n = data.rows(), dim = data.cols();
    if (c < 1 || c > n)
        throw DimensionError("cluster count " + std::to_string(c) + " must be in [1, " + std::to_string(n) + "]");
    std::mt19937_64 rng(seed);

    // k-means++ seeding; falls back to an unchosen point when all weights vanish.
    DenseMatrix centers(c, dim);
    std::vector<char> chosen(n, 0);
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    std::size_t first = static_cast<std::size_t>(rng() % n);
    for (std::size_t k = 0; k < c; ++k) {
        std::size_t pick = first;
        if (k > 0) {
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) total += chosen[i] ? 0.0 : nearest[i];
            if (total > 0.0) {
                std::vector<double> w(n);
                for (std::size_t i = 0; i < n; ++i) w[i] = chosen[i] ? 0.0 : nearest[i];
                pick = weighted_pick(rng, w, total);
            } else {
                std::vector<std::size_t> free;
                for (std::size_t i = 0; i < n; ++i)
                    if (!chosen[i]) free.push_back(i);
                pick = free[static_cast<std::size_t>(rng() % free.size())];
            }
        }
        chosen[pick] = 1;
        std::copy(data.row(pick).begin(), data.row(pick).end(), centers.row(k).begin());
        for (std::size_t i = 0; i < n; ++i)
            nearest[i] = std::min(nearest[i], kernels::sq_dist(data.row(i), centers.row(k)));
    }

    ClusteringRun run;
    run.seed = seed;
    run.assignments.assign(n, -1);
    std::vector<double> dist(n, 0.0);
    std::vector<std::size_t> counts(c);
    for (std::size_t it = 0; it < max_iters; ++it) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double best_d = kernels::sq_dist(data.row(i), centers.row(0));
            for (std::size_t k = 1; k < c; ++k) {
                const double dk = kernels::sq_dist(data.row(i), centers.row(k));
                if (dk < best_d) {
                    best_d = dk;
                    best = static_cast<int>(k);
                }
            }
            dist[i] = best_d;
            if (run.assignments[i] != best) {
                run.assignments[i] = best;
                changed = true;
            }
        }
        ++run.iterations;

        // Empty clusters take the point farthest from its centroid.
        std::fill(counts.begin(), counts.end(), 0);
        for (int a : run.assignments) ++counts[static_cast<std::size_t>(a)];
        for (std::size_t k = 0; k < c; ++k) {
            if (counts[k] > 0) continue;
            std::size_t far = n;
            for (std::size_t i = 0; i < n; ++i) {
                if (counts[static_cast<std::size_t>(run.assignments[i])] < 2) continue;
                if (far == n || dist[i] > dist[far]) far = i;
            }
            if (far == n) break;
            --counts[static_cast<std::size_t>(run.assignments[far])];
            run.assignments[far] = static_cast<int>(k);
            counts[k] = 1;
            dist[far] = 0.0;
            changed = true;
        }
        if (!changed && it > 0) break;

        std::fill(centers.data().begin(), centers.data().end(), 0.0);
        for (std::size_t i = 0; i < n; ++i)
            kernels::axpy(1.0, data.row(i), centers.row(static_cast<std::size_t>(run.assignments[i])));
        for (std::size_t k = 0; k < c; ++k)
            for (double& x : centers.row(k)) x /= static_cast<double>(counts[k]);
    }

    run.inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        run.inertia += kernels::sq_dist(data.row(i), centers.row(static_cast<std::size_t>(run.assignments[i])));
    return run;
}

std::vector<std::size_t> max_weight_assignment(const DenseMatrix& weights) {
    const std::size_t n = weights.rows();
    if (weights.cols() != n) throw DimensionError("assignment needs a square weight matrix");
    // Shortest augmenting path on costs = max - w, 1-based potentials.
    double top = 0.0;
    for (double w : weights.data()) top = std::max(top, w);
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        match[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = match[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = (top - weights(i0 - 1, j - 1)) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<std::size_t> row_to_col(n);
    for (std::size_t j = 1; j <= n; ++j) row_to_col[match[j] - 1] = j - 1;
    return row_to_col;
}

double acc(std::span<const int> pred, std::span<const int> truth) {
    check_lengths(pred, truth);
    const DenseMatrix table = contingency(pred, truth);
    const std::size_t k = std::max(table.rows(), table.cols());
    DenseMatrix square(k, k);
    for (std::size_t i = 0; i < table.rows(); ++i)
        for (std::size_t j = 0; j < table.cols(); ++j) square(i, j) = table(i, j);
    const auto assignment = max_weight_assignment(square);
    double hits = 0.0;
    for (std::size_t i = 0; i < k; ++i) hits += square(i, assignment[i]);
    return hits / static_cast<double>(pred.size());
}

double nmi(std::span<const int> pred, std::span<const int> truth) {
    check_lengths(pred, truth);
    const DenseMatrix table = contingency(pred, truth);
    const double n = static_cast<double>(pred.size());
    std::vector<double> pp(table.rows(), 0.0), pt(table.cols(), 0.0);
    for (std::size_t i = 0; i < table.rows(); ++i)
        for (std::size_t j = 0; j < table.cols(); ++j) {
            pp[i] += table(i, j) / n;
            pt[j] += table(i, j) / n;
        }
    auto entropy = [](const std::vector<double>& p) {
        double h = 0.0;
        for (double x : p)
            if (x > 0.0) h -= x * std::log(x);
        return h;
    };
    const double hp = entropy(pp), ht = entropy(pt);
    const double denom = std::max(hp, ht);
    if (denom <= 0.0) return 1.0;  // both single-class: identical partitions
    double mi = 0.0;
    for (std::size_t i = 0; i < table.rows(); ++i)
        for (std::size_t j = 0; j < table.cols(); ++j) {
            const double pij = table(i, j) / n;
            if (pij > 0.0) mi += pij * std::log(pij / (pp[i] * pt[j]));
        }
    if (hp <= 0.0 || ht <= 0.0) return 0.0;
    return std::clamp(mi / denom, 0.0, 1.0);
}

double purity(std::span<const int> pred, std::span<const int> truth) {
    check_lengths(pred, truth);
    const DenseMatrix table = contingency(pred, truth);
    double hits = 0.0;
    for (std::size_t i = 0; i < table.rows(); ++i) {
        const auto row = table.row(i);
        hits += *std::max_element(row.begin(), row.end());
    }
    return hits / static_cast<double>(pred.size());
}

MetricsRecord evaluate(std::span<const int> pred, std::span<const int> truth) {
    return {acc(pred, truth), nmi(pred, truth), purity(pred, truth)};
}

MetricsSummary summarize(std::span<const MetricsRecord> runs) {
    MetricsSummary s;
    if (runs.empty()) return s;
    const double k = static_cast<double>(runs.size());
    for (const auto& r : runs) {
        s.mean.acc += r.acc;
        s.mean.nmi += r.nmi;
        s.mean.purity += r.purity;
    }
    s.mean.acc /= k;
    s.mean.nmi /= k;
    s.mean.purity /= k;
    for (const auto& r : runs) {
        s.stddev.acc += (r.acc - s.mean.acc) * (r.acc - s.mean.acc);
        s.stddev.nmi += (r.nmi - s.mean.nmi) * (r.nmi - s.mean.nmi);
        s.stddev.purity += (r.purity - s.mean.purity) * (r.purity - s.mean.purity);
    }
    s.stddev.acc = std::sqrt(s.stddev.acc / k);
    s.stddev.nmi = std::sqrt(s.stddev.nmi / k);
    s.stddev.purity = std::sqrt(s.stddev.purity / k);
    return s;
}

}  // namespace dmrr::eval
