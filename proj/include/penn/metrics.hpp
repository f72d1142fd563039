#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "penn/datagen.hpp"
#include "penn/matrix.hpp"

namespace penn {

/// Test-set summary for one estimator on one repetition.
struct MetricsRecord {
    std::string label;
    bool has_oracle = false;
    double excess_risk = std::numeric_limits<double>::quiet_NaN();
    double excess_se = std::numeric_limits<double>::quiet_NaN();
    double mse = std::numeric_limits<double>::quiet_NaN();
    double mce = std::numeric_limits<double>::quiet_NaN();
    double puv = std::numeric_limits<double>::quiet_NaN();
    std::size_t n_test = 0;
};

/// Rows an estimator is evaluated on.
struct EvalRows {
    Matrix z;
    Matrix omega;                     // 0/1 entries as doubles
    Vector y;                         // regression responses
    std::vector<int> labels;          // classification labels

    std::size_t size() const { return z.rows; }
    std::vector<std::uint8_t> omega_row(std::size_t i) const;
};

using Predictor = std::function<double(std::span<const double> z, std::span<const double> omega)>;
using ScorePredictor =
    std::function<Vector(std::span<const double> z, std::span<const double> omega)>;

/// Paired excess-risk estimator: the mean over test rows of
/// (fhat(z, w) - y)^2 - (fstar(z, w) - y)^2, with its standard error.
Estimate excess_risk(const Predictor& predict, std::span<const double> oracle_values,
                     const EvalRows& rows);

/// Convenience overload evaluating the oracle on each row first.
Estimate excess_risk(const Predictor& predict, const BayesOracle& oracle, const EvalRows& rows);

/// f*(z, omega) for every row; reusable across estimators so comparisons stay
/// paired.
Vector oracle_values(const BayesOracle& oracle, const EvalRows& rows);

/// Mean squared prediction error on the rows.
double mse(const Predictor& predict, const EvalRows& rows);

/// Misclassification error; argmax ties resolve to the smallest class index.
double mce(const ScorePredictor& predict, const EvalRows& rows);

/// Proportion of unexplained variance: test MSE over the n-1 sample variance
/// of the responses.
double puv(const Predictor& predict, const EvalRows& rows);

struct PairedReport {
    std::uint64_t seed = 0;
    MetricsRecord penn;
    MetricsRecord nn;
};

struct BoxStats {
    double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

/// Seed-matched comparison: per-seed differences (nn - penn, so positive
/// means the pattern-embedded network won), win counts and box-plot
/// quartiles for both estimators.
struct ComparisonSummary {
    std::string metric;
    std::size_t n_seeds = 0;
    std::size_t penn_wins = 0;
    std::vector<double> differences;  // ordered by seed
    double median_difference = 0.0;
    BoxStats penn_box;
    BoxStats nn_box;
};

ComparisonSummary paired_comparison(std::vector<PairedReport> reports);

/// Joins two per-seed record lists; throws if the seed sets differ.
std::vector<PairedReport> make_paired(
    const std::vector<std::pair<std::uint64_t, MetricsRecord>>& penn,
    const std::vector<std::pair<std::uint64_t, MetricsRecord>>& nn);

BoxStats box_stats(Vector values);

}  // namespace penn
