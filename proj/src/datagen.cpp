#include "penn/datagen.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace penn {

namespace {

constexpr std::size_t kRejectionCap = 10000000;  // proposals per query

const double kSinh1 = std::sinh(1.0);

}  // namespace

SimModel SimModel::example1(int d) {
    SimModel m;
    m.kind = SimModelKind::Example1;
    m.d = d;
    m.noise_sd = 0.1;
    m.mechanism = MissingnessMechanism::mcar_uniform(d, 0.7);
    m.validate();
    return m;
}

SimModel SimModel::model1(int d) {
    SimModel m;
    m.kind = SimModelKind::Model1;
    m.d = d;
    m.noise_sd = 0.5;
    m.mechanism = MissingnessMechanism::mcar_uniform(d, 0.7);
    m.validate();
    return m;
}

SimModel SimModel::model2(int d) {
    SimModel m;
    m.kind = SimModelKind::Model2;
    m.d = d;
    m.noise_sd = 0.5;
    m.mechanism = MissingnessMechanism::threshold_mnar(d, {2, 3}, {0.4, 0.4}, 0.7);
    m.validate();
    return m;
}

SimModel SimModel::model3(int d) {
    SimModel m = model1(d);
    m.kind = SimModelKind::Model3;
    m.validate();
    return m;
}

SimModel SimModel::model4(int d) {
    SimModel m = model2(d);
    m.kind = SimModelKind::Model4;
    m.validate();
    return m;
}

SimModel SimModel::by_name(const std::string& name, int d) {
    if (name == "example1") return example1(d);
    if (name == "model1") return model1(d);
    if (name == "model2") return model2(d);
    if (name == "model3") return model3(d);
    if (name == "model4") return model4(d);
    throw std::invalid_argument("unknown model '" + name + "'");
}

std::string SimModel::name() const {
    switch (kind) {
        case SimModelKind::Example1: return "example1";
        case SimModelKind::Model1: return "model1";
        case SimModelKind::Model2: return "model2";
        case SimModelKind::Model3: return "model3";
        case SimModelKind::Model4: return "model4";
    }
    return "?";
}

double SimModel::regression(std::span<const double> x) const {
    switch (kind) {
        case SimModelKind::Example1:
            return 3.0 * x[0] * x[0];
        case SimModelKind::Model1:
        case SimModelKind::Model3:
            return std::exp(x[0] + x[1]) + 4.0 * x[2] * x[2];
        case SimModelKind::Model2:
        case SimModelKind::Model4:
            return 2.0 * std::sin(2.0 * x[0] + 2.0 * x[1]) + 2.0 * x[2];
    }
    return 0.0;
}

void SimModel::validate() const {
    int min_d = 1;
    if (kind == SimModelKind::Model1 || kind == SimModelKind::Model2) min_d = 3;
    if (correlated()) min_d = 5;
    if (d < min_d) {
        throw std::invalid_argument(name() + " requires d >= " + std::to_string(min_d));
    }
    if (mechanism.dim() != d) throw std::invalid_argument("model: mechanism dimension mismatch");
}

SampleSet sample(const SimModel& model, std::size_t n, Rng& rng) {
    model.validate();
    if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
    const int d = model.d;
    SampleSet out;
    out.x = Matrix(n, d);
    out.omega.assign(n * d, 0);
    out.y.assign(n, 0.0);
    Vector row(d);
    for (std::size_t i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) row[j] = rng.uniform(-1.0, 1.0);
        if (model.correlated()) {
            row[0] = std::sqrt(row[3] + 1.0) - 0.7 + rng.uniform(-0.3, 0.3);
            row[2] = 0.7 * row[4] + rng.uniform(-0.3, 0.3);
        }
        const double eps = rng.normal(0.0, model.noise_sd);
        std::vector<std::uint8_t> omega = draw_mask(model.mechanism, row, rng);
        std::copy(row.begin(), row.end(), out.x.row_ptr(i));
        std::copy(omega.begin(), omega.end(), out.omega.begin() + i * d);
        out.y[i] = model.regression(row) + eps;
    }
    return out;
}

BayesOracle BayesOracle::closed_form(SimModel model, Imputer::Kind imputer) {
    if (!has_closed_form(model, imputer)) {
        throw std::invalid_argument("no closed-form oracle for " + model.name() + " with " +
                                    to_string(imputer) + " imputation");
    }
    BayesOracle o;
    o.kind = Kind::ClosedForm;
    o.model = std::move(model);
    o.imputer_kind = imputer;
    return o;
}

BayesOracle BayesOracle::monte_carlo(SimModel model, Imputer::Kind imputer, std::size_t budget,
                                     std::uint64_t seed) {
    if (budget < 10000) throw std::invalid_argument("monte carlo oracle: budget must be >= 10^4");
    BayesOracle o;
    o.kind = Kind::MonteCarlo;
    o.model = std::move(model);
    o.imputer_kind = imputer;
    o.budget = budget;
    o.seed = seed;
    return o;
}

bool has_closed_form(const SimModel& model, Imputer::Kind imputer) {
    const bool constant_fill =
        imputer == Imputer::Kind::Zero || imputer == Imputer::Kind::ColumnMean;
    return constant_fill && !model.correlated();
}

namespace {

void check_query(const BayesOracle& oracle, std::span<const double> z,
                 std::span<const std::uint8_t> omega) {
    const std::size_t d = static_cast<std::size_t>(oracle.model.d);
    if (z.size() != d || omega.size() != d) {
        throw std::invalid_argument("bayes_value: query dimension mismatch");
    }
    if (oracle.imputer_kind == Imputer::Kind::Zero) {
        for (std::size_t j = 0; j < d; ++j) {
            if (!omega[j] && z[j] != 0.0) {
                throw std::invalid_argument(
                    "bayes_value: zero imputation requires z_j = 0 at missing coordinate " +
                    std::to_string(j + 1));
            }
        }
    }
}

/// Closed forms read z only at the observed coordinates, so they hold for
/// any per-column constant fill.
double closed_form_value(const SimModel& model, std::span<const double> z,
                         std::span<const std::uint8_t> omega) {
    switch (model.kind) {
        case SimModelKind::Example1:
            // E[3 X1^2] = 1 when hidden
            return omega[0] ? 3.0 * z[0] * z[0] : 1.0;
        case SimModelKind::Model1: {
            const double e1 = omega[0] ? std::exp(z[0]) : kSinh1;
            const double e2 = omega[1] ? std::exp(z[1]) : kSinh1;
            const double q3 = omega[2] ? z[2] * z[2] : 1.0 / 3.0;
            return e1 * e2 + 4.0 * q3;
        }
        case SimModelKind::Model2: {
            // X2 | missing ~ Unif(0.4, 1]; X1 | missing ~ Unif[-1, 1]
            const double c2 = (std::cos(0.8) - std::cos(2.0)) / 1.2;  // E sin(2 X2) hidden
            const double d2 = (std::sin(2.0) - std::sin(0.8)) / 1.2;  // E cos(2 X2) hidden
            double s;
            if (omega[0] && omega[1]) {
                s = std::sin(2.0 * z[0] + 2.0 * z[1]);
            } else if (omega[0]) {
                s = std::sin(2.0 * z[0]) * d2 + std::cos(2.0 * z[0]) * c2;
            } else if (omega[1]) {
                // E sin(2 X1) = 0, E cos(2 X1) = sin(2)/2
                s = 0.5 * std::sin(2.0) * std::sin(2.0 * z[1]);
            } else {
                s = 0.5 * std::sin(2.0) * c2;
            }
            const double t = omega[2] ? 2.0 * z[2] : 1.4;  // E[2 X3 | X3 > 0.4]
            return 2.0 * s + t;
        }
        default:
            throw std::logic_error("closed_form_value: unsupported model");
    }
}

struct RejectionBudget {
    std::size_t left = kRejectionCap;
    void spend(const char* what) {
        if (left == 0) {
            throw std::runtime_error(std::string("bayes_value: rejection budget exhausted while "
                                                 "sampling ") +
                                     what);
        }
        --left;
    }
};

/// Draws the coordinates the regression function reads, conditionally on the
/// observed values and the pattern.
void sample_relevant(const SimModel& model, std::span<const double> z,
                     std::span<const std::uint8_t> omega, Rng& rng, RejectionBudget& budget,
                     Vector& x) {
    switch (model.kind) {
        case SimModelKind::Example1:
            x[0] = omega[0] ? z[0] : rng.uniform(-1.0, 1.0);
            return;
        case SimModelKind::Model1:
            for (int j = 0; j < 3; ++j) x[j] = omega[j] ? z[j] : rng.uniform(-1.0, 1.0);
            return;
        case SimModelKind::Model2:
            x[0] = omega[0] ? z[0] : rng.uniform(-1.0, 1.0);
            x[1] = omega[1] ? z[1] : rng.uniform(0.4, 1.0);  // hidden iff X2 > 0.4
            x[2] = omega[2] ? z[2] : rng.uniform(0.4, 1.0);
            return;
        case SimModelKind::Model3:
            x[1] = omega[1] ? z[1] : rng.uniform(-1.0, 1.0);
            if (omega[0]) {
                x[0] = z[0];
            } else {
                const double x4 = omega[3] ? z[3] : rng.uniform(-1.0, 1.0);
                x[0] = std::sqrt(x4 + 1.0) - 0.7 + rng.uniform(-0.3, 0.3);
            }
            if (omega[2]) {
                x[2] = z[2];
            } else {
                const double x5 = omega[4] ? z[4] : rng.uniform(-1.0, 1.0);
                x[2] = 0.7 * x5 + rng.uniform(-0.3, 0.3);
            }
            return;
        case SimModelKind::Model4:
            if (omega[0]) {
                x[0] = z[0];
            } else {
                const double x4 = omega[3] ? z[3] : rng.uniform(-1.0, 1.0);
                x[0] = std::sqrt(x4 + 1.0) - 0.7 + rng.uniform(-0.3, 0.3);
            }
            x[1] = omega[1] ? z[1] : rng.uniform(0.4, 1.0);
            if (omega[2]) {
                x[2] = z[2];
            } else {
                // X3 = 0.7 X5 + U conditioned on X3 > 0.4
                while (true) {
                    budget.spend("X3 above its threshold");
                    const double x5 = omega[4] ? z[4] : rng.uniform(-1.0, 1.0);
                    const double cand = 0.7 * x5 + rng.uniform(-0.3, 0.3);
                    if (cand > 0.4) {
                        x[2] = cand;
                        break;
                    }
                }
            }
            return;
    }
}

}  // namespace

Estimate bayes_value(const BayesOracle& oracle, std::span<const double> z,
                     std::span<const std::uint8_t> omega) {
    check_query(oracle, z, omega);
    if (oracle.kind == BayesOracle::Kind::ClosedForm) {
        return {closed_form_value(oracle.model, z, omega), 0.0};
    }
    // One derived stream per query so query order does not matter.
    std::uint64_t h = oracle.seed;
    for (std::size_t j = 0; j < z.size(); ++j) {
        std::uint64_t bits;
        static_assert(sizeof(double) == sizeof(std::uint64_t));
        std::memcpy(&bits, &z[j], sizeof(bits));
        h = (h ^ (bits + 0x9e3779b97f4a7c15ULL)) * 0x100000001b3ULL;
        h = (h ^ omega[j]) * 0x100000001b3ULL;
    }
    Rng rng = Rng(oracle.seed).derive(h);
    RejectionBudget budget;
    Vector x(oracle.model.d, 0.0);
    double sum = 0.0, sum_sq = 0.0;
    const std::size_t n = oracle.budget;
    for (std::size_t i = 0; i < n; ++i) {
        sample_relevant(oracle.model, z, omega, rng, budget, x);
        const double g = oracle.model.regression(x);
        sum += g;
        sum_sq += g * g;
    }
    const double mean_g = sum / static_cast<double>(n);
    const double var = std::max(0.0, sum_sq / static_cast<double>(n) - mean_g * mean_g);
    return {mean_g, std::sqrt(var / static_cast<double>(n))};
}

Estimate bayes_risk(const BayesOracle& oracle, std::size_t n_mc, Rng& rng) {
    if (n_mc < 10000) throw std::invalid_argument("bayes_risk: n_mc must be >= 10^4");
    SampleSet rows = sample(oracle.model, n_mc, rng);
    const int d = oracle.model.d;
    Vector z(d);
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t i = 0; i < n_mc; ++i) {
        std::span<const std::uint8_t> omega{rows.omega.data() + i * d,
                                            static_cast<std::size_t>(d)};
        for (int j = 0; j < d; ++j) z[j] = omega[j] ? rows.x(i, j) : 0.0;
        const double fstar = bayes_value(oracle, z, omega).value;
        const double err = fstar - rows.y[i];
        sum += err * err;
        sum_sq += err * err * err * err;
    }
    const double mean_sq = sum / static_cast<double>(n_mc);
    const double var = std::max(0.0, sum_sq / static_cast<double>(n_mc) - mean_sq * mean_sq);
    return {mean_sq, std::sqrt(var / static_cast<double>(n_mc))};
}

}  // namespace penn
