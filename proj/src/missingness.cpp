#include "penn/missingness.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace penn {

PartialRow PartialMatrix::row(std::size_t i) const {
    PartialRow r;
    r.values.assign(values.row_ptr(i), values.row_ptr(i) + cols);
    r.observed.assign(observed.begin() + i * cols, observed.begin() + (i + 1) * cols);
    return r;
}

PartialRow mask(std::span<const double> x, std::span<const std::uint8_t> omega) {
    if (x.size() != omega.size()) throw std::invalid_argument("mask: length mismatch");
    PartialRow r;
    r.values.assign(x.begin(), x.end());
    r.observed.assign(omega.begin(), omega.end());
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (!omega[j]) r.values[j] = 0.0;  // flagged entries carry no usable value
    }
    return r;
}

PartialMatrix mask_rows(const Matrix& x, const std::vector<std::uint8_t>& omega) {
    if (omega.size() != x.size()) throw std::invalid_argument("mask_rows: flag count mismatch");
    PartialMatrix out(x.rows, x.cols);
    for (std::size_t i = 0; i < x.rows; ++i) {
        for (std::size_t j = 0; j < x.cols; ++j) {
            if (omega[i * x.cols + j]) {
                out.set(i, j, x(i, j));
            } else {
                out.set_missing(i, j);
            }
        }
    }
    return out;
}

MissingnessMechanism MissingnessMechanism::mcar(Vector q) {
    MissingnessMechanism m;
    m.kind = Kind::Mcar;
    m.q = std::move(q);
    m.validate();
    return m;
}

MissingnessMechanism MissingnessMechanism::mcar_uniform(int d, double q) {
    return mcar(Vector(d, q));
}

MissingnessMechanism MissingnessMechanism::threshold_mnar(int d, std::vector<int> coords,
                                                          Vector taus, double q_elsewhere) {
    MissingnessMechanism m;
    m.kind = Kind::ThresholdMnar;
    m.q = Vector(d, q_elsewhere);
    m.special_coords = std::move(coords);
    m.thresholds = std::move(taus);
    m.validate();
    return m;
}

MissingnessMechanism MissingnessMechanism::logistic_mnar(int d, std::vector<int> coords,
                                                         Vector slopes, Vector offsets,
                                                         double q_elsewhere) {
    MissingnessMechanism m;
    m.kind = Kind::LogisticMnar;
    m.q = Vector(d, q_elsewhere);
    m.special_coords = std::move(coords);
    m.slopes = std::move(slopes);
    m.offsets = std::move(offsets);
    m.validate();
    return m;
}

void MissingnessMechanism::validate() const {
    for (double p : q) {
        if (p < 0.0 || p > 1.0) {
            throw std::invalid_argument("mechanism: observation probability outside [0, 1]");
        }
    }
    for (int j : special_coords) {
        if (j < 1 || j > dim()) {
            throw std::invalid_argument("mechanism: coordinate " + std::to_string(j) +
                                        " out of range");
        }
    }
    if (kind == Kind::ThresholdMnar && thresholds.size() != special_coords.size()) {
        throw std::invalid_argument("mechanism: one threshold per coordinate required");
    }
    if (kind == Kind::LogisticMnar &&
        (slopes.size() != special_coords.size() || offsets.size() != special_coords.size())) {
        throw std::invalid_argument("mechanism: one (slope, offset) per coordinate required");
    }
}

std::vector<std::uint8_t> draw_mask(const MissingnessMechanism& mechanism,
                                    std::span<const double> x, Rng& rng) {
    const int d = mechanism.dim();
    if (x.size() != static_cast<std::size_t>(d)) {
        throw std::invalid_argument("draw_mask: covariate dimension mismatch");
    }
    std::vector<std::uint8_t> omega(d, 0);
    std::vector<int> special_index(d + 1, -1);
    for (std::size_t s = 0; s < mechanism.special_coords.size(); ++s) {
        special_index[mechanism.special_coords[s]] = static_cast<int>(s);
    }
    for (int j = 1; j <= d; ++j) {
        const int s = special_index[j];
        if (s >= 0 && mechanism.kind == MissingnessMechanism::Kind::ThresholdMnar) {
            omega[j - 1] = x[j - 1] <= mechanism.thresholds[s] ? 1 : 0;
        } else if (s >= 0 && mechanism.kind == MissingnessMechanism::Kind::LogisticMnar) {
            const double p =
                1.0 / (std::exp(mechanism.slopes[s] * x[j - 1] + mechanism.offsets[s]) + 1.0);
            omega[j - 1] = rng.bernoulli(p) ? 1 : 0;
        } else {
            omega[j - 1] = rng.bernoulli(mechanism.q[j - 1]) ? 1 : 0;
        }
    }
    return omega;
}

Imputer Imputer::zero() {
    Imputer imp;
    imp.kind = Kind::Zero;
    imp.fitted = true;
    return imp;
}

namespace {

Vector observed_column_means(const PartialMatrix& data) {
    Vector means(data.cols, 0.0);
    for (std::size_t j = 0; j < data.cols; ++j) {
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t i = 0; i < data.rows; ++i) {
            if (data.is_observed(i, j)) {
                sum += data.values(i, j);
                ++count;
            }
        }
        if (count == 0) {
            throw std::invalid_argument("fit_imputer: column " + std::to_string(j + 1) +
                                        " has no observed entries");
        }
        means[j] = sum / static_cast<double>(count);
    }
    return means;
}

/// Ridge regression of column j on all other columns of the completed
/// matrix, over rows where column j is observed. The intercept is the last
/// coefficient and is not penalised.
Vector fit_column_ridge(const Matrix& completed, const PartialMatrix& data, std::size_t j,
                        double ridge) {
    const std::size_t d = completed.cols;
    const std::size_t p = d;  // d-1 covariates + intercept
    Matrix gram(p, p);
    Vector rhs(p, 0.0);
    Vector feat(p, 0.0);
    for (std::size_t i = 0; i < completed.rows; ++i) {
        if (!data.is_observed(i, j)) continue;
        std::size_t c = 0;
        for (std::size_t j2 = 0; j2 < d; ++j2) {
            if (j2 != j) feat[c++] = completed(i, j2);
        }
        feat[p - 1] = 1.0;
        const double y = completed(i, j);
        for (std::size_t a = 0; a < p; ++a) {
            for (std::size_t b = a; b < p; ++b) gram(a, b) += feat[a] * feat[b];
            rhs[a] += feat[a] * y;
        }
    }
    for (std::size_t a = 0; a < p; ++a) {
        for (std::size_t b = 0; b < a; ++b) gram(a, b) = gram(b, a);
    }
    for (std::size_t a = 0; a + 1 < p; ++a) gram(a, a) += ridge;  // intercept unpenalised
    gram(p - 1, p - 1) += 1e-12;                                  // guard against all-missing rows
    return cholesky_solve(std::move(gram), std::move(rhs));
}

double apply_column_model(const Vector& beta, std::span<const double> row, std::size_t j) {
    double v = beta[beta.size() - 1];
    std::size_t c = 0;
    for (std::size_t j2 = 0; j2 < row.size(); ++j2) {
        if (j2 != j) v += beta[c++] * row[j2];
    }
    return v;
}

}  // namespace

Imputer fit_imputer(Imputer::Kind kind, const PartialMatrix& data, IterativeOptions opts) {
    Imputer imp;
    imp.kind = kind;
    if (kind == Imputer::Kind::Zero) {
        imp.fitted = true;
        return imp;
    }
    imp.column_means = observed_column_means(data);
    if (kind == Imputer::Kind::ColumnMean) {
        imp.fitted = true;
        return imp;
    }

    if (opts.rounds < 1) throw std::invalid_argument("fit_imputer: rounds must be >= 1");
    imp.rounds = opts.rounds;
    imp.ridge = opts.ridge;

    Matrix completed = data.values;
    for (std::size_t i = 0; i < data.rows; ++i) {
        for (std::size_t j = 0; j < data.cols; ++j) {
            if (!data.is_observed(i, j)) completed(i, j) = imp.column_means[j];
        }
    }
    imp.coefficients.assign(data.cols, Vector());
    for (int round = 0; round < imp.rounds; ++round) {
        for (std::size_t j = 0; j < data.cols; ++j) {
            imp.coefficients[j] = fit_column_ridge(completed, data, j, imp.ridge);
            for (std::size_t i = 0; i < data.rows; ++i) {
                if (!data.is_observed(i, j)) {
                    completed(i, j) = apply_column_model(
                        imp.coefficients[j], {completed.row_ptr(i), data.cols}, j);
                }
            }
        }
    }
    imp.fitted = true;
    return imp;
}

Vector impute(const Imputer& imputer, const PartialRow& row) {
    if (!imputer.fitted) throw std::logic_error("impute: imputer not fitted");
    const std::size_t d = row.values.size();
    if (row.observed.size() != d) throw std::invalid_argument("impute: flag length mismatch");
    Vector z = row.values;
    switch (imputer.kind) {
        case Imputer::Kind::Zero:
            for (std::size_t j = 0; j < d; ++j) {
                if (!row.observed[j]) z[j] = 0.0;
            }
            break;
        case Imputer::Kind::ColumnMean:
            if (imputer.column_means.size() != d) {
                throw std::invalid_argument("impute: imputer fitted for different dimension");
            }
            for (std::size_t j = 0; j < d; ++j) {
                if (!row.observed[j]) z[j] = imputer.column_means[j];
            }
            break;
        case Imputer::Kind::Iterative: {
            if (imputer.column_means.size() != d) {
                throw std::invalid_argument("impute: imputer fitted for different dimension");
            }
            for (std::size_t j = 0; j < d; ++j) {
                if (!row.observed[j]) z[j] = imputer.column_means[j];
            }
            for (int round = 0; round < imputer.rounds; ++round) {
                for (std::size_t j = 0; j < d; ++j) {
                    if (!row.observed[j]) {
                        z[j] = apply_column_model(imputer.coefficients[j], z, j);
                    }
                }
            }
            break;
        }
    }
    return z;
}

Matrix impute_all(const Imputer& imputer, const PartialMatrix& data) {
    Matrix out(data.rows, data.cols);
    for (std::size_t i = 0; i < data.rows; ++i) {
        Vector z = impute(imputer, data.row(i));
        std::copy(z.begin(), z.end(), out.row_ptr(i));
    }
    return out;
}

std::string to_string(Imputer::Kind kind) {
    switch (kind) {
        case Imputer::Kind::Zero: return "zero";
        case Imputer::Kind::ColumnMean: return "mean";
        case Imputer::Kind::Iterative: return "iterative";
    }
    return "?";
}

Imputer::Kind imputer_kind_from_string(const std::string& name) {
    if (name == "zero") return Imputer::Kind::Zero;
    if (name == "mean") return Imputer::Kind::ColumnMean;
    if (name == "iterative") return Imputer::Kind::Iterative;
    throw std::invalid_argument("unknown imputer kind '" + name + "'");
}

}  // namespace penn
