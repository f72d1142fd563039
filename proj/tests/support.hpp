#pragma once

// Test-side oracles, kept independent of the production evaluation paths.

#include <cmath>
#include <functional>
#include <vector>

#include "penn/mlp.hpp"
#include "penn/penn_net.hpp"
#include "penn/rng.hpp"

namespace testsupport {

/// Straight-line re-evaluation of an Mlp: plain nested loops over the raw
/// weight/bias arrays, written independently of penn::forward.
inline penn::Vector naive_forward(const penn::Mlp& net, const penn::Vector& x) {
    penn::Vector act = x;
    for (int l = 0; l <= net.arch.depth; ++l) {
        const auto& w = net.weights[l];
        penn::Vector next(w.rows, 0.0);
        for (std::size_t i = 0; i < w.rows; ++i) {
            double s = net.biases[l][i];
            for (std::size_t j = 0; j < w.cols; ++j) s += w(i, j) * act[j];
            next[i] = s;
        }
        if (l < net.arch.depth) {
            for (double& v : next) {
                if (v < 0.0) v = 0.0;
            }
        }
        act = next;
    }
    return act;
}

inline penn::Vector flat_grad(const penn::MlpGrad& g) {
    penn::Vector flat;
    for (std::size_t l = 0; l < g.w.size(); ++l) {
        flat.insert(flat.end(), g.w[l].data.begin(), g.w[l].data.end());
        flat.insert(flat.end(), g.b[l].begin(), g.b[l].end());
    }
    return flat;
}

inline penn::Vector flat_params(const penn::Penn& net) {
    penn::Vector flat = penn::param_vector(net.f1);
    penn::Vector f2 = penn::param_vector(net.f2);
    penn::Vector f3 = penn::param_vector(net.f3);
    flat.insert(flat.end(), f2.begin(), f2.end());
    flat.insert(flat.end(), f3.begin(), f3.end());
    return flat;
}

inline void set_flat_params(penn::Penn& net, const penn::Vector& flat) {
    const std::size_t v1 = net.f1.arch.param_count();
    const std::size_t v2 = net.f2.arch.param_count();
    const std::size_t v3 = net.f3.arch.param_count();
    penn::set_param_vector(net.f1, std::span<const double>(flat.data(), v1));
    penn::set_param_vector(net.f2, std::span<const double>(flat.data() + v1, v2));
    penn::set_param_vector(net.f3, std::span<const double>(flat.data() + v1 + v2, v3));
}

inline penn::Vector flat_grad(const penn::PennGrad& g) {
    penn::Vector flat = flat_grad(g.g1);
    penn::Vector g2 = flat_grad(g.g2);
    penn::Vector g3 = flat_grad(g.g3);
    flat.insert(flat.end(), g2.begin(), g2.end());
    flat.insert(flat.end(), g3.begin(), g3.end());
    return flat;
}

struct FdCheck {
    std::size_t eligible = 0;
    std::size_t passed = 0;

    double pass_fraction() const {
        return eligible == 0 ? 1.0 : static_cast<double>(passed) / static_cast<double>(eligible);
    }
};

/// Central-difference check of an analytic gradient. `loss_at` evaluates the
/// loss at a flat parameter vector; `eligible` marks coordinates whose unit
/// pre-activations stay away from the ReLU kink.
inline FdCheck fd_check(const std::function<double(const penn::Vector&)>& loss_at,
                        penn::Vector theta, const penn::Vector& analytic,
                        const std::vector<bool>& eligible_coords, double h = 1e-5,
                        double tol = 1e-4) {
    FdCheck result;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        if (!eligible_coords.empty() && !eligible_coords[i]) continue;
        ++result.eligible;
        const double saved = theta[i];
        theta[i] = saved + h;
        const double up = loss_at(theta);
        theta[i] = saved - h;
        const double down = loss_at(theta);
        theta[i] = saved;
        const double fd = (up - down) / (2.0 * h);
        const double denom = std::max({std::abs(fd), std::abs(analytic[i]), 1e-5});
        if (std::abs(fd - analytic[i]) / denom < tol) ++result.passed;
    }
    return result;
}

/// Marks the parameter coordinates of an Mlp whose unit pre-activations have
/// magnitude above the threshold for every sample in the batch. Appends to
/// `out` in param_vector order.
inline void mlp_eligibility(const penn::Mlp& net, const penn::Matrix& x, double threshold,
                            std::vector<bool>& out) {
    penn::ForwardTrace tr = penn::forward_trace(net, x);
    for (int l = 0; l <= net.arch.depth; ++l) {
        const auto& pre = tr.pre[l];
        std::vector<bool> unit_ok(pre.cols, true);
        for (std::size_t i = 0; i < pre.rows; ++i) {
            for (std::size_t j = 0; j < pre.cols; ++j) {
                if (std::abs(pre(i, j)) <= threshold) unit_ok[j] = false;
            }
        }
        const auto& w = net.weights[l];
        for (std::size_t j = 0; j < w.rows; ++j) {
            for (std::size_t k = 0; k < w.cols; ++k) out.push_back(unit_ok[j]);
        }
        for (std::size_t j = 0; j < w.rows; ++j) out.push_back(unit_ok[j]);
    }
}

inline penn::Architecture random_architecture(penn::Rng& rng, int in_dim, int out_dim,
                                              int max_depth = 4, int max_width = 16) {
    const int depth = 1 + static_cast<int>(rng.index(max_depth));
    std::vector<int> widths{in_dim};
    for (int l = 0; l < depth; ++l) widths.push_back(2 + static_cast<int>(rng.index(max_width - 1)));
    widths.push_back(out_dim);
    return penn::Architecture(depth, widths);
}

}  // namespace testsupport
