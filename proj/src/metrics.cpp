#include "penn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace penn {

std::vector<std::uint8_t> EvalRows::omega_row(std::size_t i) const {
    std::vector<std::uint8_t> w(omega.cols);
    for (std::size_t j = 0; j < omega.cols; ++j) w[j] = omega(i, j) != 0.0 ? 1 : 0;
    return w;
}

Estimate excess_risk(const Predictor& predict, std::span<const double> oracle_vals,
                     const EvalRows& rows) {
    const std::size_t n = rows.size();
    if (n == 0) throw std::invalid_argument("excess_risk: no test rows");
    if (oracle_vals.size() != n) throw std::invalid_argument("excess_risk: oracle value count");
    Vector terms(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double fhat = predict({rows.z.row_ptr(i), rows.z.cols},
                                    {rows.omega.row_ptr(i), rows.omega.cols});
        const double a = fhat - rows.y[i];
        const double b = oracle_vals[i] - rows.y[i];
        terms[i] = a * a - b * b;
    }
    return {mean(terms), standard_error(terms)};
}

Vector oracle_values(const BayesOracle& oracle, const EvalRows& rows) {
    const std::size_t n = rows.size();
    Vector vals(n);
    for (std::size_t i = 0; i < n; ++i) {
        vals[i] = bayes_value(oracle, {rows.z.row_ptr(i), rows.z.cols}, rows.omega_row(i)).value;
    }
    return vals;
}

Estimate excess_risk(const Predictor& predict, const BayesOracle& oracle, const EvalRows& rows) {
    return excess_risk(predict, oracle_values(oracle, rows), rows);
}

double mse(const Predictor& predict, const EvalRows& rows) {
    const std::size_t n = rows.size();
    if (n == 0) throw std::invalid_argument("mse: no test rows");
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double fhat = predict({rows.z.row_ptr(i), rows.z.cols},
                                    {rows.omega.row_ptr(i), rows.omega.cols});
        const double d = fhat - rows.y[i];
        total += d * d;
    }
    return total / static_cast<double>(n);
}

double mce(const ScorePredictor& predict, const EvalRows& rows) {
    const std::size_t n = rows.size();
    if (n == 0 || rows.labels.size() != n) {
        throw std::invalid_argument("mce: labelled test rows required");
    }
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < n; ++i) {
        Vector scores = predict({rows.z.row_ptr(i), rows.z.cols},
                                {rows.omega.row_ptr(i), rows.omega.cols});
        std::size_t best = 0;
        for (std::size_t c = 1; c < scores.size(); ++c) {
            if (scores[c] > scores[best]) best = c;  // ties keep the smaller index
        }
        if (static_cast<int>(best) != rows.labels[i]) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(n);
}

double puv(const Predictor& predict, const EvalRows& rows) {
    if (rows.size() < 2) throw std::invalid_argument("puv: need at least two test rows");
    const double variance = sample_variance(rows.y);
    if (variance == 0.0) throw std::invalid_argument("puv: responses have zero sample variance");
    return mse(predict, rows) / variance;
}

BoxStats box_stats(Vector values) {
    if (values.empty()) throw std::invalid_argument("box_stats: empty");
    std::sort(values.begin(), values.end());
    BoxStats b;
    b.min = values.front();
    b.max = values.back();
    b.q1 = quantile_of_sorted(values, 0.25);
    b.median = quantile_of_sorted(values, 0.5);
    b.q3 = quantile_of_sorted(values, 0.75);
    return b;
}

namespace {

double primary_metric(const MetricsRecord& r) {
    if (r.has_oracle) return r.excess_risk;
    if (std::isfinite(r.mce)) return r.mce;
    if (std::isfinite(r.puv)) return r.puv;
    return r.mse;
}

std::string primary_metric_name(const MetricsRecord& r) {
    if (r.has_oracle) return "excess_risk";
    if (std::isfinite(r.mce)) return "mce";
    if (std::isfinite(r.puv)) return "puv";
    return "mse";
}

}  // namespace

ComparisonSummary paired_comparison(std::vector<PairedReport> reports) {
    if (reports.empty()) throw std::invalid_argument("paired_comparison: no reports");
    std::sort(reports.begin(), reports.end(),
              [](const PairedReport& a, const PairedReport& b) { return a.seed < b.seed; });
    for (std::size_t i = 1; i < reports.size(); ++i) {
        if (reports[i].seed == reports[i - 1].seed) {
            throw std::invalid_argument("paired_comparison: duplicate seed " +
                                        std::to_string(reports[i].seed));
        }
    }
    ComparisonSummary s;
    s.metric = primary_metric_name(reports.front().penn);
    s.n_seeds = reports.size();
    Vector penn_vals, nn_vals;
    for (const auto& r : reports) {
        const double p = primary_metric(r.penn);
        const double q = primary_metric(r.nn);
        s.differences.push_back(q - p);
        if (p < q) ++s.penn_wins;
        penn_vals.push_back(p);
        nn_vals.push_back(q);
    }
    Vector sorted_diff = s.differences;
    std::sort(sorted_diff.begin(), sorted_diff.end());
    s.median_difference = median_of_sorted(sorted_diff);
    s.penn_box = box_stats(penn_vals);
    s.nn_box = box_stats(nn_vals);
    return s;
}

std::vector<PairedReport> make_paired(
    const std::vector<std::pair<std::uint64_t, MetricsRecord>>& penn,
    const std::vector<std::pair<std::uint64_t, MetricsRecord>>& nn) {
    std::map<std::uint64_t, MetricsRecord> by_seed;
    for (const auto& [seed, rec] : nn) by_seed[seed] = rec;
    if (by_seed.size() != nn.size() || penn.size() != nn.size()) {
        throw std::invalid_argument("make_paired: seed sets do not match");
    }
    std::vector<PairedReport> out;
    for (const auto& [seed, rec] : penn) {
        auto it = by_seed.find(seed);
        if (it == by_seed.end()) {
            throw std::invalid_argument("make_paired: seed " + std::to_string(seed) +
                                        " present for one estimator only");
        }
        out.push_back({seed, rec, it->second});
    }
    return out;
}

}  // namespace penn
