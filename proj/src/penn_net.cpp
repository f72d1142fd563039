#include "penn/penn_net.hpp"

#include <cmath>
#include <stdexcept>

namespace penn {

void Penn::validate() const {
    if (f1.arch.input_dim() != f2.arch.input_dim()) {
        throw std::invalid_argument("penn: f1 and f2 must share the input dimension d, got " +
                                    std::to_string(f1.arch.input_dim()) + " and " +
                                    std::to_string(f2.arch.input_dim()));
    }
    const int concat = f1.arch.output_dim() + f2.arch.output_dim();
    if (f3.arch.input_dim() != concat) {
        throw std::invalid_argument("penn: combiner input width " +
                                    std::to_string(f3.arch.input_dim()) +
                                    " must equal f1 out + f2 out = " + std::to_string(concat));
    }
}

void Penn::ensure_mask() {
    f1.ensure_mask();
    f2.ensure_mask();
    f3.ensure_mask();
}

void Penn::apply_mask() {
    f1.apply_mask();
    f2.apply_mask();
    f3.apply_mask();
}

PennGrad PennGrad::zeros_like(const Penn& net) {
    return {MlpGrad::zeros_like(net.f1), MlpGrad::zeros_like(net.f2), MlpGrad::zeros_like(net.f3)};
}

void PennGrad::zero() {
    g1.zero();
    g2.zero();
    g3.zero();
}

std::vector<TensorView> tensor_views(Penn& net) {
    std::vector<TensorView> views = tensor_views(net.f1);
    for (auto& v : tensor_views(net.f2)) views.push_back(v);
    for (auto& v : tensor_views(net.f3)) views.push_back(v);
    return views;
}

std::vector<TensorView> tensor_views(PennGrad& grad) {
    std::vector<TensorView> views = tensor_views(grad.g1);
    for (auto& v : tensor_views(grad.g2)) views.push_back(v);
    for (auto& v : tensor_views(grad.g3)) views.push_back(v);
    return views;
}

std::size_t nonzero_count(const Penn& net) {
    return nonzero_count(net.f1) + nonzero_count(net.f2) + nonzero_count(net.f3);
}

namespace {

Matrix concat_cols(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows, a.cols + b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        double* o = out.row_ptr(i);
        const double* ar = a.row_ptr(i);
        const double* br = b.row_ptr(i);
        std::copy(ar, ar + a.cols, o);
        std::copy(br, br + b.cols, o + a.cols);
    }
    return out;
}

}  // namespace

Matrix penn_forward_batch(const Penn& net, const Matrix& z, const Matrix& omega) {
    if (z.rows != omega.rows) {
        throw std::invalid_argument("penn_forward: z and omega row counts differ");
    }
    Matrix h1 = forward_batch(net.f1, z);
    Matrix h2 = forward_batch(net.f2, omega);
    return forward_batch(net.f3, concat_cols(h1, h2));
}

Vector penn_forward(const Penn& net, std::span<const double> z, std::span<const double> omega) {
    Matrix zm(1, z.size());
    std::copy(z.begin(), z.end(), zm.data.begin());
    Matrix om(1, omega.size());
    std::copy(omega.begin(), omega.end(), om.data.begin());
    Matrix out = penn_forward_batch(net, zm, om);
    return Vector(out.data.begin(), out.data.end());
}

Vector embed(const Penn& net, std::span<const double> omega) {
    return forward(net.f2, omega);
}

double penn_loss_and_grad(const Penn& net, const Matrix& z, const Matrix& omega, const Targets& y,
                          PennGrad* grad) {
    if (z.rows == 0) throw std::invalid_argument("penn_loss_and_grad: empty batch");
    if (z.rows != omega.rows || y.count() != z.rows) {
        throw std::invalid_argument("penn_loss_and_grad: batch size mismatch");
    }
    ForwardTrace t1 = forward_trace(net.f1, z);
    ForwardTrace t2 = forward_trace(net.f2, omega);
    ForwardTrace t3 = forward_trace(net.f3, concat_cols(t1.output(), t2.output()));

    double loss = mean_loss(t3.output(), y);
    if (!std::isfinite(loss)) {
        throw std::runtime_error("penn_loss_and_grad: non-finite loss");
    }
    if (!grad) return loss;

    grad->zero();
    Matrix delta_concat;
    backward_from(net.f3, t3, loss_gradient(t3.output(), y), grad->g3, &delta_concat);

    // Split the concatenation gradient into the f1 and f2 blocks.
    const std::size_t n = z.rows;
    const std::size_t w1 = t1.output().cols;
    const std::size_t w2 = t2.output().cols;
    Matrix d1(n, w1), d2(n, w2);
    for (std::size_t i = 0; i < n; ++i) {
        const double* dr = delta_concat.row_ptr(i);
        std::copy(dr, dr + w1, d1.row_ptr(i));
        std::copy(dr + w1, dr + w1 + w2, d2.row_ptr(i));
    }
    backward_from(net.f1, t1, d1, grad->g1, nullptr);
    backward_from(net.f2, t2, d2, grad->g2, nullptr);
    return loss;
}

Penn build_paper_penn(int d, const Task& task, Rng& rng, int width) {
    if (d < 1) throw std::invalid_argument("build_paper_penn: d must be >= 1");
    const int w = width;
    const int out = task.output_dim();
    Penn net;
    net.f1 = Mlp::random(Architecture(3, {d, w, w, w, w}), rng);
    net.f2 = Mlp::random(Architecture(2, {d, 30, 30, 3}), rng);
    net.f3 = Mlp::random(Architecture(3, {w + 3, w, w, w, out}), rng);
    net.budget.s = nonzero_count(net);
    net.validate();
    return net;
}

Mlp build_paper_nn(int d, const Task& task, Rng& rng, int width) {
    if (d < 1) throw std::invalid_argument("build_paper_nn: d must be >= 1");
    const int w = width;
    return Mlp::random(Architecture(6, {d, w, w, w, w, w, w, task.output_dim()}), rng);
}

}  // namespace penn
