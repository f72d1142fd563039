#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace penn {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles. Deliberately minimal: the project only
/// needs contiguous storage, element access and a few solve helpers.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    const double& operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    double* row_ptr(std::size_t i) { return data.data() + i * cols; }
    const double* row_ptr(std::size_t i) const { return data.data() + i * cols; }

    std::size_t size() const { return data.size(); }
    void fill(double v) { std::fill(data.begin(), data.end(), v); }

    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
};

inline double mean(const Vector& x) {
    if (x.empty()) return 0.0;
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

/// Sample variance with the unbiased n-1 divisor.
inline double sample_variance(const Vector& x) {
    if (x.size() < 2) return 0.0;
    double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

inline double sample_stddev(const Vector& x) { return std::sqrt(sample_variance(x)); }

/// Standard error of the sample mean.
inline double standard_error(const Vector& x) {
    if (x.size() < 2) return 0.0;
    return sample_stddev(x) / std::sqrt(static_cast<double>(x.size()));
}

inline double median_of_sorted(const Vector& sorted) {
    const std::size_t n = sorted.size();
    if (n == 0) throw std::invalid_argument("median of empty vector");
    return n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

/// Linear-interpolation quantile on a sorted vector (numpy default convention).
inline double quantile_of_sorted(const Vector& sorted, double q) {
    const std::size_t n = sorted.size();
    if (n == 0) throw std::invalid_argument("quantile of empty vector");
    if (n == 1) return sorted[0];
    double pos = q * static_cast<double>(n - 1);
    auto lo = static_cast<std::size_t>(pos);
    if (lo >= n - 1) return sorted[n - 1];
    double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

/// Solves A x = b for symmetric positive-definite A via Cholesky, in place.
/// Throws if A is not positive definite.
Vector cholesky_solve(Matrix a, Vector b);

}  // namespace penn
