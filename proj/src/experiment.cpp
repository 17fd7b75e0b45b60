#include "dmrr/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "dmrr/error.hpp"
#include "dmrr/graphs.hpp"

namespace dmrr::experiment {
namespace {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::string format_lambda(const std::optional<double>& v) {
    if (!v) return "-";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", *v);
    return buf;
}

std::string format_metric(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10f", v);
    return buf;
}

std::string cell_label(const std::optional<double>& l1, const std::optional<double>& l2) {
    return "lambda1=" + format_lambda(l1) + " lambda2=" + format_lambda(l2);
}

std::string format_vector(std::span<const double> v) {
    std::string out;
    char buf[40];
    for (double x : v) {
        std::snprintf(buf, sizeof buf, "%.17g\n", x);
        out += buf;
    }
    return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

void validate(const ExperimentConfig& config, const DataMatrix& data, const LabelVector& labels) {
    check_pairing(data, labels);
    if (config.lambda1_grid.empty() || config.lambda2_grid.empty())
        throw std::invalid_argument("lambda grids must be non-empty");
    for (double l : config.lambda1_grid)
        if (!(l > 0.0)) throw std::invalid_argument("lambda1 values must be positive");
    for (double l : config.lambda2_grid)
        if (!(l >= 0.0)) throw std::invalid_argument("lambda2 values must be >= 0");
    if (config.feature_counts.empty()) throw std::invalid_argument("feature counts must be non-empty");
    for (std::size_t m : config.feature_counts)
        if (m < 1 || m > data.d())
            throw DimensionError("feature count " + std::to_string(m) + " outside [1, " +
                                 std::to_string(data.d()) + "]");
    if (config.kmeans_runs < 1) throw std::invalid_argument("kmeans_runs must be >= 1");
    if (labels.num_classes() > data.n())
        throw DimensionError("more classes than samples");
}

struct Cell {
    std::size_t i = 0, j = 0;
    std::optional<double> lambda1, lambda2;
};

// Inputs shared read-only by every cell.
struct Prepared {
    std::optional<graphs::SimilarityGraph> sample_graph;
    std::optional<graphs::SimilarityGraph> feature_graph;
    std::optional<graphs::BipartiteGraph> bipartite;
    std::optional<graphs::DualLaplacian> laplacian;  // lambda2 = 0, re-weighted per cell
    ScoreVector u0;
    ScoreVector v0;
};

template <class F>
auto run_stage(const char* stage, const std::string& where, F&& f) {
    try {
        return f();
    } catch (const std::exception& e) {
        throw ExperimentError(std::string("stage '") + stage + "' failed" +
                              (where.empty() ? "" : " at " + where) + ": " + e.what());
    }
}

}  // namespace

std::string_view method_name(Method m) noexcept {
    switch (m) {
        case Method::Baseline: return "baseline";
        case Method::Smrr: return "smrr";
        case Method::Fmrr: return "fmrr";
        case Method::Sfmrr: return "sfmrr";
        case Method::Dmrr: return "dmrr";
    }
    return "?";
}

Method parse_method(std::string_view name) {
    for (Method m : {Method::Baseline, Method::Smrr, Method::Fmrr, Method::Sfmrr, Method::Dmrr})
        if (name == method_name(m)) return m;
    throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

std::vector<double> default_lambda_grid() { return {1e0, 1e1, 1e2, 1e3, 1e4, 1e5}; }

std::vector<std::size_t> default_feature_counts() {
    std::vector<std::size_t> out;
    for (std::size_t m = 10; m <= 100; m += 10) out.push_back(m);
    return out;
}

std::uint64_t derive_seed(std::uint64_t base, std::size_t i, std::size_t j, std::size_t m,
                          std::size_t run) noexcept {
    std::uint64_t h = splitmix64(static_cast<std::uint64_t>(i));
    h = splitmix64(h ^ static_cast<std::uint64_t>(j));
    h = splitmix64(h ^ static_cast<std::uint64_t>(m));
    h = splitmix64(h ^ static_cast<std::uint64_t>(run));
    return base ^ h;
}

ExperimentReport run_experiment(const DataMatrix& data, const LabelVector& labels,
                                const std::optional<scores::RawScores>& external,
                                const ExperimentConfig& config) {
    validate(config, data, labels);
    const Method method = config.method;
    const graphs::GraphParams params{config.k, config.gamma};
    const std::size_t graphs_before = graphs::construction_count();

    Prepared prep;
    const bool need_sample = method == Method::Smrr || method == Method::Dmrr || !external;
    const bool need_feature = method == Method::Fmrr || method == Method::Dmrr;
    const bool need_bipartite = method == Method::Sfmrr || method == Method::Dmrr;
    run_stage("graphs", "", [&] {
        if (need_sample) prep.sample_graph = graphs::knn_gaussian_graph(data, graphs::Side::Sample, params);
        if (need_feature) prep.feature_graph = graphs::knn_gaussian_graph(data, graphs::Side::Feature, params);
        if (need_bipartite) prep.bipartite = graphs::bipartite_graph(data, config.gamma);
        if (method == Method::Dmrr)
            prep.laplacian = graphs::dual_laplacian(*prep.sample_graph, *prep.feature_graph, *prep.bipartite, 0.0);
        return 0;
    });
    run_stage("init_scores", "", [&] {
        if (external) {
            if (external->values.size() != data.d())
                throw DimensionError("external scores have " + std::to_string(external->values.size()) +
                                     " entries, data has d=" + std::to_string(data.d()));
            prep.v0 = scores::normalize_scores_to_simplex(*external);
        } else {
            prep.v0 = scores::normalize_scores_to_simplex(scores::laplacian_score(data, *prep.sample_graph));
        }
        prep.u0 = scores::initial_sample_scores(data);
        return 0;
    });

    std::vector<Cell> cells;
    if (method == Method::Baseline) {
        cells.push_back({});
    } else {
        for (std::size_t i = 0; i < config.lambda1_grid.size(); ++i) {
            if (method == Method::Dmrr) {
                for (std::size_t j = 0; j < config.lambda2_grid.size(); ++j)
                    cells.push_back({i, j, config.lambda1_grid[i], config.lambda2_grid[j]});
            } else {
                cells.push_back({i, 0, config.lambda1_grid[i], std::nullopt});
            }
        }
    }

    const std::size_t per_cell = config.feature_counts.size();
    ExperimentReport report;
    report.method = method;
    report.feature_counts = config.feature_counts;
    report.cells.resize(cells.size());
    report.rows.resize(cells.size() * per_cell);
    report.initial_feature_scores = prep.v0;
    report.initial_sample_scores = prep.u0;

    const auto truth = labels.ids();
    const std::size_t c = labels.num_classes();

    auto run_cell = [&](std::size_t index) {
        const Cell& cell = cells[index];
        const std::string where = cell_label(cell.lambda1, cell.lambda2);
        CellResult& out = report.cells[index];
        out.lambda1 = cell.lambda1;
        out.lambda2 = cell.lambda2;
        out.first_row = index * per_cell;

        run_stage("rerank", where, [&] {
            switch (method) {
                case Method::Baseline:
                    out.feature_scores = prep.v0;
                    break;
                case Method::Smrr:
                    out.sample_scores = rerank::smrr(*prep.sample_graph, prep.u0, *cell.lambda1);
                    out.feature_scores = prep.v0;
                    break;
                case Method::Fmrr:
                    out.feature_scores = rerank::fmrr(*prep.feature_graph, prep.v0, *cell.lambda1);
                    break;
                case Method::Sfmrr: {
                    auto r = rerank::sfmrr(*prep.bipartite, prep.u0, prep.v0, *cell.lambda1, config.outer_tol,
                                           config.max_outer_iters);
                    out.sample_scores = std::move(r.sample_scores);
                    out.feature_scores = std::move(r.feature_scores);
                    out.trace = std::move(r.trace);
                    break;
                }
                case Method::Dmrr: {
                    const auto laplacian = prep.laplacian->with_lambda2(*cell.lambda2);
                    rerank::RerankParams rp;
                    rp.lambda1 = *cell.lambda1;
                    rp.lambda2 = *cell.lambda2;
                    rp.tol = config.outer_tol;
                    rp.max_outer_iters = config.max_outer_iters;
                    auto r = rerank::dmrr(laplacian, prep.u0, prep.v0, rp);
                    out.sample_scores = std::move(r.sample_scores);
                    out.feature_scores = std::move(r.selection.scores);
                    out.trace = std::move(r.trace);
                    out.indefinite = r.sample_qp_indefinite || r.feature_qp_indefinite;
                    break;
                }
            }
            out.feature_order = rerank::descending_order(out.feature_scores.values);
            return 0;
        });
        if (method == Method::Baseline || method == Method::Smrr || method == Method::Fmrr) {
            out.trace.converged = true;
        }

        run_stage("eval", where, [&] {
            for (std::size_t k = 0; k < per_cell; ++k) {
                const std::size_t m = config.feature_counts[k];
                ResultRow& row = report.rows[out.first_row + k];
                row.method = method;
                row.lambda1 = cell.lambda1;
                row.lambda2 = cell.lambda2;
                row.m = m;
                row.outer_iters = out.trace.iterations;
                row.converged = out.trace.converged;
                const DenseMatrix subset = data.select_columns(
                    std::span<const std::size_t>(out.feature_order.data(), m));
                row.runs.reserve(config.kmeans_runs);
                for (std::size_t r = 0; r < config.kmeans_runs; ++r) {
                    const auto run = eval::kmeans(subset, c, derive_seed(config.base_seed, cell.i, cell.j, m, r));
                    row.runs.push_back(eval::evaluate(run.assignments, truth));
                }
                row.metrics = eval::summarize(row.runs);
                out.average.acc += row.metrics.mean.acc / static_cast<double>(per_cell);
                out.average.nmi += row.metrics.mean.nmi / static_cast<double>(per_cell);
                out.average.purity += row.metrics.mean.purity / static_cast<double>(per_cell);
            }
            return 0;
        });
    };

    std::size_t jobs = config.jobs ? config.jobs : std::max(1u, std::thread::hardware_concurrency());
    jobs = std::min(jobs, cells.size());
    std::atomic<std::size_t> next{0};
    std::mutex mutex;
    std::exception_ptr failure;
    std::size_t finished = 0;
    auto worker = [&] {
        while (true) {
            const std::size_t index = next.fetch_add(1);
            if (index >= cells.size()) return;
            {
                std::lock_guard lock(mutex);
                if (failure) return;
            }
            try {
                run_cell(index);
            } catch (...) {
                std::lock_guard lock(mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
            if (config.progress) {
                std::lock_guard lock(mutex);
                const auto& cr = report.cells[index];
                ++finished;
                std::cerr << "[" << finished << "/" << cells.size() << "] " << method_name(method) << ' '
                          << cell_label(cr.lambda1, cr.lambda2) << " outer_iters=" << cr.trace.iterations
                          << " converged=" << (cr.trace.converged ? "yes" : "no")
                          << " acc_avg=" << format_metric(cr.average.acc) << '\n';
            }
        }
    };
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    for (std::size_t index = 1; index < report.cells.size(); ++index)
        if (report.cells[index].average.acc > report.cells[report.best_cell].average.acc)
            report.best_cell = index;
    report.graph_constructions = graphs::construction_count() - graphs_before;

    if (config.dump_graphs && !config.out_dir.empty()) {
        std::filesystem::create_directories(config.out_dir);
        auto dump = [&](const char* name, auto const& weights) {
            std::ofstream out(config.out_dir / name);
            graphs::write_coo(out, weights);
        };
        if (prep.sample_graph) dump("graph_samples.coo", prep.sample_graph->weights);
        if (prep.feature_graph) dump("graph_features.coo", prep.feature_graph->weights);
        if (prep.bipartite) dump("graph_bipartite.coo", prep.bipartite->weights);
    }
    return report;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
    if (config.out_dir.empty()) throw std::invalid_argument("an output directory is required");
    run_stage("report", "", [&] {
        std::filesystem::create_directories(config.out_dir);
        write_file(config.out_dir / "results.csv", "");
        return 0;
    });

    auto loaded = run_stage("load", "", [&] {
        LoadOptions opts{config.delimiter, config.has_header, config.label_column};
        return load_matrix(config.data_path, opts);
    });
    std::optional<LabelVector> labels = std::move(loaded.labels);
    if (config.label_path) labels = run_stage("load", "", [&] { return load_labels(*config.label_path); });
    if (!labels) throw ExperimentError("stage 'load' failed: no labels given (use a label file or column)");

    std::optional<scores::RawScores> external;
    if (config.scores_path)
        external = run_stage("load", "", [&] {
            return scores::load_external_scores(*config.scores_path, config.orientation, loaded.matrix.d());
        });

    ExperimentReport report = run_experiment(loaded.matrix, *labels, external, config);
    run_stage("report", "", [&] {
        emit_report(report, config.out_dir);
        return 0;
    });
    return report;
}

std::string results_csv(const ExperimentReport& report) {
    std::ostringstream out;
    out << "method,lambda1,lambda2,m,acc_mean,acc_std,nmi_mean,nmi_std,purity_mean,purity_std,outer_iters,converged\n";
    for (const auto& row : report.rows) {
        out << method_name(row.method) << ',' << format_lambda(row.lambda1) << ',' << format_lambda(row.lambda2)
            << ',' << row.m << ',' << format_metric(row.metrics.mean.acc) << ','
            << format_metric(row.metrics.stddev.acc) << ',' << format_metric(row.metrics.mean.nmi) << ','
            << format_metric(row.metrics.stddev.nmi) << ',' << format_metric(row.metrics.mean.purity) << ','
            << format_metric(row.metrics.stddev.purity) << ',' << row.outer_iters << ','
            << (row.converged ? "true" : "false") << '\n';
    }
    return out.str();
}

std::string summary_csv(const ExperimentReport& report) {
    std::ostringstream out;
    out << "method,lambda1,lambda2,acc_avg,nmi_avg,purity_avg,outer_iters,converged,indefinite,best\n";
    for (std::size_t i = 0; i < report.cells.size(); ++i) {
        const auto& cell = report.cells[i];
        out << method_name(report.method) << ',' << format_lambda(cell.lambda1) << ','
            << format_lambda(cell.lambda2) << ',' << format_metric(cell.average.acc) << ','
            << format_metric(cell.average.nmi) << ',' << format_metric(cell.average.purity) << ','
            << cell.trace.iterations << ',' << (cell.trace.converged ? "true" : "false") << ','
            << (cell.indefinite ? "true" : "false") << ',' << (i == report.best_cell ? "true" : "false")
            << '\n';
    }
    return out.str();
}

std::string curves_csv(const ExperimentReport& report) {
    std::ostringstream out;
    out << "m,acc_mean,acc_std,nmi_mean,nmi_std,purity_mean,purity_std\n";
    if (report.cells.empty()) return out.str();
    const auto& best = report.cells[report.best_cell];
    for (std::size_t k = 0; k < report.feature_counts.size(); ++k) {
        const auto& row = report.rows[best.first_row + k];
        out << row.m << ',' << format_metric(row.metrics.mean.acc) << ',' << format_metric(row.metrics.stddev.acc)
            << ',' << format_metric(row.metrics.mean.nmi) << ',' << format_metric(row.metrics.stddev.nmi) << ','
            << format_metric(row.metrics.mean.purity) << ',' << format_metric(row.metrics.stddev.purity) << '\n';
    }
    return out.str();
}

void emit_report(const ExperimentReport& report, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    write_file(out_dir / "results.csv", results_csv(report));
    write_file(out_dir / "summary.csv", summary_csv(report));
    write_file(out_dir / "curves.csv", curves_csv(report));
    if (report.cells.empty()) return;
    const auto& best = report.cells[report.best_cell];
    write_file(out_dir / "feature_scores.txt", format_vector(best.feature_scores.values));
    std::string order;
    for (std::size_t j : best.feature_order) order += std::to_string(j) + '\n';
    write_file(out_dir / "feature_order.txt", order);
    const ScoreVector& u = best.sample_scores ? *best.sample_scores : report.initial_sample_scores;
    write_file(out_dir / "sample_scores.txt", format_vector(u.values));
}

std::vector<double> parse_grid(std::string_view text) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto pos = text.find(',', start);
        auto tok = text.substr(start, pos == std::string_view::npos ? pos : pos - start);
        while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
        while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size())
            throw std::invalid_argument("bad number '" + std::string(tok) + "' in list");
        out.push_back(v);
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::vector<std::size_t> parse_feature_counts(std::string_view text) {
    auto to_count = [](double v) {
        if (!(v >= 1.0) || v != std::floor(v)) throw std::invalid_argument("feature counts must be positive integers");
        return static_cast<std::size_t>(v);
    };
    std::vector<std::size_t> out;
    if (text.find(':') != std::string_view::npos) {
        std::string s(text);
        for (char& ch : s)
            if (ch == ':') ch = ',';
        const auto parts = parse_grid(s);
        if (parts.size() != 3) throw std::invalid_argument("range must be start:step:stop");
        const std::size_t start = to_count(parts[0]), step = to_count(parts[1]), stop = to_count(parts[2]);
        for (std::size_t m = start; m <= stop; m += step) out.push_back(m);
    } else {
        for (double v : parse_grid(text)) out.push_back(to_count(v));
    }
    if (out.empty()) throw std::invalid_argument("empty feature count list");
    return out;
}

}  // namespace dmrr::experiment
