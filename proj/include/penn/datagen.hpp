#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "penn/matrix.hpp"
#include "penn/missingness.hpp"
#include "penn/rng.hpp"

namespace penn {

enum class SimModelKind { Example1, Model1, Model2, Model3, Model4 };

/// Simulated data-generating processes. Covariates are Unif[-1,1]^d; Models 3
/// and 4 overwrite X1 = sqrt(X4 + 1) - 0.7 + U[-0.3, 0.3] and
/// X3 = 0.7 X5 + U[-0.3, 0.3]. The response adds N(0, noise_sd^2) noise to the
/// regression function; the mechanism produces the revelation vectors.
struct SimModel {
    SimModelKind kind = SimModelKind::Model1;
    int d = 20;
    double noise_sd = 0.5;
    MissingnessMechanism mechanism;

    static SimModel example1(int d = 1);
    static SimModel model1(int d = 20);
    static SimModel model2(int d = 20);
    static SimModel model3(int d = 20);
    static SimModel model4(int d = 20);
    static SimModel by_name(const std::string& name, int d);

    std::string name() const;
    bool correlated() const {
        return kind == SimModelKind::Model3 || kind == SimModelKind::Model4;
    }
    double regression(std::span<const double> x) const;
    void validate() const;
};

/// i.i.d. draws of (X, Omega, Y).
struct SampleSet {
    Matrix x;
    std::vector<std::uint8_t> omega;  // n * d flags
    Vector y;

    std::size_t size() const { return y.size(); }
};

SampleSet sample(const SimModel& model, std::size_t n, Rng& rng);

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

/// Bayes regression-function oracle f*(z, omega) = E(Y | Z = z, Omega = omega).
/// ClosedForm implements the analytic conditional expectation for Example 1
/// and Models 1-2 under constant-fill imputation (zero or column mean);
/// MonteCarlo samples the unobserved coordinates from their conditional law
/// given the pattern, with rejection where a threshold constrains a
/// correlated coordinate.
struct BayesOracle {
    enum class Kind { ClosedForm, MonteCarlo };

    Kind kind = Kind::ClosedForm;
    SimModel model;
    Imputer::Kind imputer_kind = Imputer::Kind::Zero;
    std::size_t budget = 100000;
    std::uint64_t seed = 0;

    static BayesOracle closed_form(SimModel model, Imputer::Kind imputer);
    static BayesOracle monte_carlo(SimModel model, Imputer::Kind imputer, std::size_t budget,
                                   std::uint64_t seed);
};

/// Whether the closed form is implemented for this model/imputer pair.
bool has_closed_form(const SimModel& model, Imputer::Kind imputer);

/// f*(z, omega), with a Monte Carlo standard error when estimated (zero for
/// closed forms). Deterministic given the oracle seed.
Estimate bayes_value(const BayesOracle& oracle, std::span<const double> z,
                     std::span<const std::uint8_t> omega);

/// Estimates the Bayes risk R(f*) = E[(f*(Z, Omega) - Y)^2] over fresh draws.
Estimate bayes_risk(const BayesOracle& oracle, std::size_t n_mc, Rng& rng);

}  // namespace penn
