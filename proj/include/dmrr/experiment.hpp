#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dmrr/datasets.hpp"
#include "dmrr/eval.hpp"
#include "dmrr/init_scores.hpp"
#include "dmrr/rerank.hpp"

namespace dmrr::experiment {

enum class Method { Baseline, Smrr, Fmrr, Sfmrr, Dmrr };

std::string_view method_name(Method m) noexcept;
Method parse_method(std::string_view name);

/// {1e0, 1e1, ..., 1e5}
std::vector<double> default_lambda_grid();
/// 10, 20, ..., 100
std::vector<std::size_t> default_feature_counts();

struct ExperimentConfig {
    std::filesystem::path data_path;
    std::optional<std::filesystem::path> label_path;
    std::optional<std::size_t> label_column;
    char delimiter = ',';
    bool has_header = false;

    std::optional<std::filesystem::path> scores_path;
    scores::Orientation orientation = scores::Orientation::HigherIsBetter;

    Method method = Method::Dmrr;
    std::size_t k = 5;
    double gamma = 8.0;
    std::vector<double> lambda1_grid = default_lambda_grid();
    std::vector<double> lambda2_grid = default_lambda_grid();
    std::vector<std::size_t> feature_counts = default_feature_counts();
    std::size_t kmeans_runs = 20;
    std::uint64_t base_seed = 0;
    std::size_t jobs = 0;  // 0 = hardware concurrency
    std::filesystem::path out_dir;
    bool progress = false;  // one line per finished cell on stderr
    bool dump_graphs = false;

    double outer_tol = 1e-6;
    std::size_t max_outer_iters = 300;
};

/// One (method, lambda1, lambda2, m) line of results.csv.
struct ResultRow {
    Method method = Method::Dmrr;
    std::optional<double> lambda1;
    std::optional<double> lambda2;
    std::size_t m = 0;
    eval::MetricsSummary metrics;
    std::vector<eval::MetricsRecord> runs;
    std::size_t outer_iters = 0;
    bool converged = true;
};

/// One parameter cell: the re-ranked scores and metrics averaged over m.
struct CellResult {
    std::optional<double> lambda1;
    std::optional<double> lambda2;
    std::vector<std::size_t> feature_order;
    ScoreVector feature_scores;
    std::optional<ScoreVector> sample_scores;
    rerank::ObjectiveTrace trace;
    bool indefinite = false;
    eval::MetricsRecord average;   // over the feature counts
    std::size_t first_row = 0;     // rows[first_row, first_row + |feature_counts|)
};

struct ExperimentReport {
    Method method = Method::Dmrr;
    std::vector<std::size_t> feature_counts;
    std::vector<ResultRow> rows;
    std::vector<CellResult> cells;
    std::size_t best_cell = 0;  // highest average ACC, first in grid order on ties
    std::size_t graph_constructions = 0;
    ScoreVector initial_feature_scores;
    ScoreVector initial_sample_scores;
};

/// A stage failed; the message names the stage and the grid cell.
class ExperimentError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Seed of k-means run `run` for cell (i, j) at feature count m.
std::uint64_t derive_seed(std::uint64_t base, std::size_t i, std::size_t j, std::size_t m,
                          std::size_t run) noexcept;

/// In-memory pipeline. `external` replaces the built-in Laplacian Score prior.
ExperimentReport run_experiment(const DataMatrix& data, const LabelVector& labels,
                                const std::optional<scores::RawScores>& external,
                                const ExperimentConfig& config);

/// Loads inputs named by `config`, checks out_dir is writable, runs, and
/// writes the report files.
ExperimentReport run_experiment(const ExperimentConfig& config);

std::string results_csv(const ExperimentReport& report);
std::string summary_csv(const ExperimentReport& report);
std::string curves_csv(const ExperimentReport& report);

/// Writes results.csv, summary.csv, curves.csv and the best cell's
/// feature_scores.txt, feature_order.txt, sample_scores.txt.
void emit_report(const ExperimentReport& report, const std::filesystem::path& out_dir);

/// "1,10,100" -> {1, 10, 100}
std::vector<double> parse_grid(std::string_view text);
/// "start:step:stop" (inclusive) or a comma list.
std::vector<std::size_t> parse_feature_counts(std::string_view text);

}  // namespace dmrr::experiment
