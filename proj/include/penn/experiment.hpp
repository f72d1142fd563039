#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "penn/csv.hpp"
#include "penn/datagen.hpp"
#include "penn/metrics.hpp"
#include "penn/serialize.hpp"
#include "penn/training.hpp"

namespace penn {

struct SplitSizes {
    std::size_t train = 2000;
    std::size_t validation = 1000;
    std::size_t test = 1000;

    std::size_t total() const { return train + validation + test; }
};

struct OracleConfig {
    std::string kind = "auto";       // auto | closed_form | monte_carlo | none
    std::size_t budget = 100000;     // Monte Carlo draws per oracle query
};

/// One experiment: a data source, imputers, estimators, split sizes,
/// repetitions and the training protocol.
struct ExperimentConfig {
    std::string model;         // simulated model name; empty when a dataset file is used
    std::string dataset_path;
    int d = 20;
    std::vector<Imputer::Kind> imputers = {Imputer::Kind::ColumnMean};
    bool imputer_fit_train_only = false;
    bool use_penn = true;
    bool use_nn = true;
    SplitSizes split;
    std::vector<double> split_ratio = {8.0, 1.0, 1.0};  // dataset runs without explicit sizes
    bool split_by_ratio = false;
    int repetitions = 10;
    std::uint64_t seed = 1;
    int width = 70;
    TrainConfig train;
    OracleConfig oracle;
    std::string out_dir;

    void validate() const;
    static ExperimentConfig from_json(const Json& doc);  // strict: unknown keys rejected
    Json to_json() const;
};

/// Result of one (repetition, imputer) unit. A failed unit carries its error
/// instead of aborting the run.
struct RepResult {
    std::size_t repetition = 0;
    std::string imputer;
    bool failed = false;
    std::string error;
    std::optional<MetricsRecord> penn;
    std::optional<MetricsRecord> nn;
    double penn_lambda = 0.0;
    double nn_lambda = 0.0;
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<RepResult> units;  // ordered by (repetition, imputer)
    std::vector<std::pair<std::string, ComparisonSummary>> summaries;  // per imputer
    // example1 repetition 0 test rows: z, omega, y, bayes, penn, nn
    std::vector<std::array<double, 6>> curve_rows;

    Json to_json() const;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

/// Reproduction presets for the simulated experiments, with sizes scaled by
/// `scale` in (0, 1].
ExperimentConfig preset_config(const std::string& preset, double scale, std::uint64_t seed);

/// Writes result.json, per_seed.csv and manifest.json; with plots enabled
/// also an excess-risk box plot SVG and, for example1, the fitted-vs-true
/// curve CSV of repetition 0.
std::vector<std::filesystem::path> write_experiment_outputs(const ExperimentResult& result,
                                                            const std::filesystem::path& out_dir,
                                                            bool emit_plots);

void write_boxplot_svg(const std::filesystem::path& path,
                       const std::vector<std::pair<std::string, BoxStats>>& groups,
                       const std::string& title, const std::string& y_label);

/// Thread count for repetition-level parallelism: PENN_THREADS when set,
/// otherwise the hardware concurrency, clamped to the repetition count.
std::size_t worker_count(std::size_t repetitions);

}  // namespace penn
