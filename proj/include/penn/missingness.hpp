#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "penn/matrix.hpp"
#include "penn/rng.hpp"

namespace penn {

/// A vector with explicitly missing entries.
struct PartialRow {
    Vector values;                       // undefined where not observed
    std::vector<std::uint8_t> observed;  // revelation vector
};

/// n x d real matrix with a per-entry missing flag.
struct PartialMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    Matrix values;
    std::vector<std::uint8_t> observed;  // rows * cols flags
    std::vector<std::string> column_names;

    PartialMatrix() = default;
    PartialMatrix(std::size_t r, std::size_t c)
        : rows(r), cols(c), values(r, c), observed(r * c, 0) {}

    bool is_observed(std::size_t i, std::size_t j) const { return observed[i * cols + j] != 0; }
    void set(std::size_t i, std::size_t j, double v) {
        values(i, j) = v;
        observed[i * cols + j] = 1;
    }
    void set_missing(std::size_t i, std::size_t j) {
        values(i, j) = 0.0;
        observed[i * cols + j] = 0;
    }
    PartialRow row(std::size_t i) const;
};

/// The masking operator x (*) omega: entry j is observed iff omega_j = 1.
PartialRow mask(std::span<const double> x, std::span<const std::uint8_t> omega);

/// Masks a full matrix row-wise.
PartialMatrix mask_rows(const Matrix& x, const std::vector<std::uint8_t>& omega);

/// Missingness mechanisms: MCAR draws independent per-coordinate Bernoullis;
/// ThresholdMNAR fixes omega_j = 1{x_j <= tau_j} on a coordinate set and is
/// MCAR elsewhere; LogisticMNAR observes coordinate j with probability
/// 1 / (exp(slope * x_j + offset) + 1) on its coordinate set, MCAR elsewhere.
struct MissingnessMechanism {
    enum class Kind { Mcar, ThresholdMnar, LogisticMnar };

    Kind kind = Kind::Mcar;
    Vector q;                        // per-coordinate observation probabilities
    std::vector<int> special_coords; // 1-based coordinates governed by the MNAR rule
    Vector thresholds;               // ThresholdMnar, per special coordinate
    Vector slopes;                   // LogisticMnar, per special coordinate
    Vector offsets;

    static MissingnessMechanism mcar(Vector q);
    static MissingnessMechanism mcar_uniform(int d, double q);
    static MissingnessMechanism threshold_mnar(int d, std::vector<int> coords, Vector taus,
                                               double q_elsewhere);
    static MissingnessMechanism logistic_mnar(int d, std::vector<int> coords, Vector slopes,
                                              Vector offsets, double q_elsewhere);

    int dim() const { return static_cast<int>(q.size()); }
    void validate() const;
};

/// Draws a revelation vector for covariate row x.
std::vector<std::uint8_t> draw_mask(const MissingnessMechanism& mechanism,
                                    std::span<const double> x, Rng& rng);

/// Imputation algorithms. Zero fills zeros; ColumnMean fills per-column
/// means of the observed entries; Iterative initialises with column means
/// and then cycles ridge regressions of each column on the others for a
/// fixed number of rounds.
struct Imputer {
    enum class Kind { Zero, ColumnMean, Iterative };

    Kind kind = Kind::Zero;
    bool fitted = false;
    Vector column_means;
    std::vector<Vector> coefficients;  // per column: one weight per other column, intercept last
    int rounds = 5;
    double ridge = 1e-3;

    static Imputer zero();
};

struct IterativeOptions {
    int rounds = 5;
    double ridge = 1e-3;
};

/// Fits an imputer of the requested kind. Throws (naming the column) if a
/// column needed by ColumnMean/Iterative has no observed entries.
Imputer fit_imputer(Imputer::Kind kind, const PartialMatrix& data, IterativeOptions opts = {});

/// Completes one partially observed row. Observed entries pass through
/// unchanged.
Vector impute(const Imputer& imputer, const PartialRow& row);

/// Completes every row of a partial matrix.
Matrix impute_all(const Imputer& imputer, const PartialMatrix& data);

std::string to_string(Imputer::Kind kind);
Imputer::Kind imputer_kind_from_string(const std::string& name);

}  // namespace penn
