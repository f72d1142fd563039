#include "penn/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace penn {

Architecture::Architecture(int l, std::vector<int> p) : depth(l), widths(std::move(p)) {
    if (depth < 0) throw std::invalid_argument("architecture: depth must be >= 0");
    if (widths.size() != static_cast<std::size_t>(depth) + 2) {
        throw std::invalid_argument("architecture: widths must have length depth + 2, got " +
                                    std::to_string(widths.size()));
    }
    for (int w : widths) {
        if (w < 1) throw std::invalid_argument("architecture: all widths must be >= 1");
    }
}

std::size_t Architecture::param_count() const {
    std::size_t v = 0;
    for (int l = 0; l <= depth; ++l) {
        v += static_cast<std::size_t>(widths[l + 1]) * (static_cast<std::size_t>(widths[l]) + 1);
    }
    return v;
}

Mlp Mlp::zeros(const Architecture& arch) {
    Mlp net;
    net.arch = arch;
    for (int l = 0; l <= arch.depth; ++l) {
        net.weights.emplace_back(arch.widths[l + 1], arch.widths[l]);
        net.biases.emplace_back(arch.widths[l + 1], 0.0);
    }
    return net;
}

Mlp Mlp::random(const Architecture& arch, Rng& rng) {
    Mlp net = zeros(arch);
    for (int l = 0; l <= arch.depth; ++l) {
        const double fan_in = arch.widths[l];
        const double wb = std::sqrt(6.0 / fan_in);
        const double bb = 1.0 / std::sqrt(fan_in);
        for (double& w : net.weights[l].data) w = rng.uniform(-wb, wb);
        for (double& b : net.biases[l]) b = rng.uniform(-bb, bb);
    }
    return net;
}

void Mlp::ensure_mask() {
    if (mask) return;
    Mask m;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        m.w.emplace_back(weights[l].size(), std::uint8_t{1});
        m.b.emplace_back(biases[l].size(), std::uint8_t{1});
    }
    mask = std::move(m);
}

void Mlp::apply_mask() {
    if (!mask) return;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        for (std::size_t i = 0; i < weights[l].size(); ++i) {
            if (!mask->w[l][i]) weights[l].data[i] = 0.0;
        }
        for (std::size_t i = 0; i < biases[l].size(); ++i) {
            if (!mask->b[l][i]) biases[l][i] = 0.0;
        }
    }
}

MlpGrad MlpGrad::zeros_like(const Mlp& net) {
    MlpGrad g;
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        g.w.emplace_back(net.weights[l].rows, net.weights[l].cols);
        g.b.emplace_back(net.biases[l].size(), 0.0);
    }
    return g;
}

void MlpGrad::zero() {
    for (auto& m : w) m.fill(0.0);
    for (auto& v : b) std::fill(v.begin(), v.end(), 0.0);
}

std::vector<TensorView> tensor_views(Mlp& net) {
    std::vector<TensorView> views;
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        TensorView wv;
        wv.values = net.weights[l].data.data();
        wv.mask = net.mask ? net.mask->w[l].data() : nullptr;
        wv.size = net.weights[l].size();
        wv.is_bias = false;
        wv.fan_in = net.arch.widths[l];
        views.push_back(wv);

        TensorView bv;
        bv.values = net.biases[l].data();
        bv.mask = net.mask ? net.mask->b[l].data() : nullptr;
        bv.size = net.biases[l].size();
        bv.is_bias = true;
        bv.fan_in = net.arch.widths[l];
        views.push_back(bv);
    }
    return views;
}

std::vector<TensorView> tensor_views(MlpGrad& grad) {
    std::vector<TensorView> views;
    for (std::size_t l = 0; l < grad.w.size(); ++l) {
        views.push_back({grad.w[l].data.data(), nullptr, grad.w[l].size(), false, 0});
        views.push_back({grad.b[l].data(), nullptr, grad.b[l].size(), true, 0});
    }
    return views;
}

Targets Targets::squared(Matrix y) {
    Targets t;
    t.kind = LossKind::Squared;
    t.values = std::move(y);
    return t;
}

Targets Targets::classes(std::vector<int> y) {
    Targets t;
    t.kind = LossKind::CrossEntropy;
    t.labels = std::move(y);
    return t;
}

namespace {

void check_input_dim(const Mlp& net, std::size_t dim) {
    if (dim != static_cast<std::size_t>(net.arch.input_dim())) {
        throw std::invalid_argument("forward: input has dimension " + std::to_string(dim) +
                                    " but layer 1 expects " + std::to_string(net.arch.input_dim()));
    }
}

/// Affine layer on a batch: out = act * W^T + b. Rows are samples.
void affine_batch(const Matrix& act, const Matrix& w, const Vector& b, Matrix& out) {
    const std::size_t n = act.rows, p_out = w.rows, p_in = w.cols;
    out = Matrix(n, p_out);
    for (std::size_t i = 0; i < n; ++i) {
        const double* a = act.row_ptr(i);
        double* o = out.row_ptr(i);
        for (std::size_t j = 0; j < p_out; ++j) {
            const double* wr = w.row_ptr(j);
            double s = b[j];
            for (std::size_t k = 0; k < p_in; ++k) s += wr[k] * a[k];
            o[j] = s;
        }
    }
}

void relu_inplace(Matrix& m) {
    for (double& v : m.data) v = v > 0.0 ? v : 0.0;
}

int first_nonfinite_layer(const Mlp& net, const Matrix& x) {
    Matrix act = x;
    for (int l = 0; l <= net.arch.depth; ++l) {
        Matrix pre;
        affine_batch(act, net.weights[l], net.biases[l], pre);
        for (double v : pre.data) {
            if (!std::isfinite(v)) return l + 1;
        }
        if (l < net.arch.depth) relu_inplace(pre);
        act = std::move(pre);
    }
    return -1;
}

}  // namespace

Vector forward(const Mlp& net, std::span<const double> x) {
    check_input_dim(net, x.size());
    Matrix in(1, x.size());
    std::copy(x.begin(), x.end(), in.data.begin());
    Matrix out = forward_batch(net, in);
    return Vector(out.data.begin(), out.data.end());
}

Matrix forward_batch(const Mlp& net, const Matrix& x) {
    check_input_dim(net, x.cols);
    Matrix act = x;
    for (int l = 0; l <= net.arch.depth; ++l) {
        Matrix pre;
        affine_batch(act, net.weights[l], net.biases[l], pre);
        if (l < net.arch.depth) relu_inplace(pre);
        act = std::move(pre);
    }
    return act;
}

ForwardTrace forward_trace(const Mlp& net, const Matrix& x) {
    check_input_dim(net, x.cols);
    const int depth = net.arch.depth;
    ForwardTrace tr;
    tr.act.resize(depth + 2);
    tr.pre.resize(depth + 1);
    tr.act[0] = x;
    for (int l = 0; l <= depth; ++l) {
        affine_batch(tr.act[l], net.weights[l], net.biases[l], tr.pre[l]);
        tr.act[l + 1] = tr.pre[l];
        if (l < depth) relu_inplace(tr.act[l + 1]);
    }
    return tr;
}

void backward_from(const Mlp& net, const ForwardTrace& trace, const Matrix& delta_out,
                   MlpGrad& grad, Matrix* delta_input) {
    const int depth = net.arch.depth;
    const std::size_t n = trace.act[0].rows;
    if (!delta_out.same_shape(trace.output())) {
        throw std::invalid_argument("backward_from: delta shape mismatch");
    }
    Matrix delta = delta_out;
    for (int l = depth; l >= 0; --l) {
        Matrix& dw = grad.w[l];
        Vector& db = grad.b[l];
        const Matrix& a = trace.act[l];
        for (std::size_t i = 0; i < n; ++i) {
            const double* dr = delta.row_ptr(i);
            const double* ar = a.row_ptr(i);
            for (std::size_t j = 0; j < dw.rows; ++j) {
                const double dj = dr[j];
                if (dj == 0.0) continue;
                double* wr = dw.row_ptr(j);
                for (std::size_t k = 0; k < dw.cols; ++k) wr[k] += dj * ar[k];
                db[j] += dj;
            }
        }
        if (l > 0 || delta_input) {
            // delta_prev = delta * W_l, gated by relu'(pre[l-1]) except at the input.
            const Matrix& w = net.weights[l];
            Matrix prev(n, w.cols);
            for (std::size_t i = 0; i < n; ++i) {
                const double* dr = delta.row_ptr(i);
                double* pr = prev.row_ptr(i);
                for (std::size_t j = 0; j < w.rows; ++j) {
                    const double dj = dr[j];
                    if (dj == 0.0) continue;
                    const double* wr = w.row_ptr(j);
                    for (std::size_t k = 0; k < w.cols; ++k) pr[k] += dj * wr[k];
                }
                if (l > 0) {
                    const double* prev_pre = trace.pre[l - 1].row_ptr(i);
                    for (std::size_t k = 0; k < w.cols; ++k) {
                        if (!(prev_pre[k] > 0.0)) pr[k] = 0.0;
                    }
                }
            }
            if (l == 0) {
                *delta_input = std::move(prev);
            } else {
                delta = std::move(prev);
            }
        }
    }

    if (net.mask) {
        for (std::size_t l = 0; l < grad.w.size(); ++l) {
            for (std::size_t i = 0; i < grad.w[l].size(); ++i) {
                if (!net.mask->w[l][i]) grad.w[l].data[i] = 0.0;
            }
            for (std::size_t i = 0; i < grad.b[l].size(); ++i) {
                if (!net.mask->b[l][i]) grad.b[l][i] = 0.0;
            }
        }
    }
}

Vector param_vector(const Mlp& net) {
    Vector theta;
    theta.reserve(net.arch.param_count());
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        theta.insert(theta.end(), net.weights[l].data.begin(), net.weights[l].data.end());
        theta.insert(theta.end(), net.biases[l].begin(), net.biases[l].end());
    }
    return theta;
}

void set_param_vector(Mlp& net, std::span<const double> theta) {
    if (theta.size() != net.arch.param_count()) {
        throw std::invalid_argument("set_param_vector: expected " +
                                    std::to_string(net.arch.param_count()) + " parameters, got " +
                                    std::to_string(theta.size()));
    }
    std::size_t pos = 0;
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        std::copy_n(theta.begin() + pos, net.weights[l].size(), net.weights[l].data.begin());
        pos += net.weights[l].size();
        std::copy_n(theta.begin() + pos, net.biases[l].size(), net.biases[l].begin());
        pos += net.biases[l].size();
    }
}

std::size_t nonzero_count(const Mlp& net) {
    std::size_t n = 0;
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        for (double v : net.weights[l].data) n += v != 0.0;
        for (double v : net.biases[l]) n += v != 0.0;
    }
    return n;
}

double mean_loss(const Matrix& predictions, const Targets& y) {
    const std::size_t n = predictions.rows;
    if (n == 0) throw std::invalid_argument("loss: empty batch");
    double total = 0.0;
    if (y.kind == LossKind::Squared) {
        if (!predictions.same_shape(y.values)) {
            throw std::invalid_argument("loss: prediction/target shape mismatch");
        }
        for (std::size_t i = 0; i < predictions.size(); ++i) {
            double d = predictions.data[i] - y.values.data[i];
            total += d * d;
        }
    } else {
        if (y.labels.size() != n) throw std::invalid_argument("loss: label count mismatch");
        if (predictions.cols < 2) {
            throw std::invalid_argument("loss: cross-entropy needs output width >= 2");
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double* s = predictions.row_ptr(i);
            int label = y.labels[i];
            if (label < 0 || static_cast<std::size_t>(label) >= predictions.cols) {
                throw std::invalid_argument("loss: label out of range at row " + std::to_string(i));
            }
            double mx = s[0];
            for (std::size_t c = 1; c < predictions.cols; ++c) mx = std::max(mx, s[c]);
            double lse = 0.0;
            for (std::size_t c = 0; c < predictions.cols; ++c) lse += std::exp(s[c] - mx);
            total += mx + std::log(lse) - s[label];
        }
    }
    return total / static_cast<double>(n);
}

Matrix loss_gradient(const Matrix& predictions, const Targets& y) {
    const std::size_t n = predictions.rows;
    const double inv_n = 1.0 / static_cast<double>(n);
    Matrix delta(n, predictions.cols);
    if (y.kind == LossKind::Squared) {
        for (std::size_t i = 0; i < predictions.size(); ++i) {
            delta.data[i] = 2.0 * (predictions.data[i] - y.values.data[i]) * inv_n;
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const double* s = predictions.row_ptr(i);
            double* dr = delta.row_ptr(i);
            double mx = s[0];
            for (std::size_t c = 1; c < predictions.cols; ++c) mx = std::max(mx, s[c]);
            double lse = 0.0;
            for (std::size_t c = 0; c < predictions.cols; ++c) lse += std::exp(s[c] - mx);
            for (std::size_t c = 0; c < predictions.cols; ++c) {
                dr[c] = (std::exp(s[c] - mx) / lse) * inv_n;
            }
            dr[y.labels[i]] -= inv_n;
        }
    }
    return delta;
}

double mlp_loss_and_grad(const Mlp& net, const Matrix& x, const Targets& y, MlpGrad* grad) {
    if (x.rows == 0) throw std::invalid_argument("loss_and_grad: empty batch");
    if (y.count() != x.rows) throw std::invalid_argument("loss_and_grad: target count mismatch");
    ForwardTrace tr = forward_trace(net, x);
    double loss = mean_loss(tr.output(), y);
    if (!std::isfinite(loss)) {
        int bad = first_nonfinite_layer(net, x);
        throw std::runtime_error("loss_and_grad: non-finite values, first offending layer " +
                                 std::to_string(bad > 0 ? bad : net.arch.depth + 1));
    }
    if (grad) {
        grad->zero();
        backward_from(net, tr, loss_gradient(tr.output(), y), *grad, nullptr);
    }
    return loss;
}

double truncate(double y, double bound) {
    if (bound < 0.0) throw std::invalid_argument("truncate: bound must be >= 0");
    return std::max(-bound, std::min(y, bound));
}

Vector cholesky_solve(Matrix a, Vector b) {
    const std::size_t n = a.rows;
    if (a.cols != n || b.size() != n) throw std::invalid_argument("cholesky_solve: shape mismatch");
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= a(j, k) * a(j, k);
        if (d <= 0.0) throw std::runtime_error("cholesky_solve: matrix not positive definite");
        d = std::sqrt(d);
        a(j, j) = d;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
            a(i, j) = s / d;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= a(i, k) * b[k];
        b[i] = s / a(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= a(k, ii) * b[k];
        b[ii] = s / a(ii, ii);
    }
    return b;
}

}  // namespace penn
