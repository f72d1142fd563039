#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "penn/matrix.hpp"
#include "penn/rng.hpp"

namespace penn {

/// Architecture (L, p): L hidden layers, widths vector of length L+2 with
/// widths[0] the input dimension and widths[L+1] the output dimension.
struct Architecture {
    int depth = 0;
    std::vector<int> widths;

    Architecture() = default;
    Architecture(int l, std::vector<int> p);

    int input_dim() const { return widths.front(); }
    int output_dim() const { return widths.back(); }

    /// Total parameter count V = sum_l p_l * (p_{l-1} + 1).
    std::size_t param_count() const;

    bool operator==(const Architecture&) const = default;
};

/// Binary trainable/nonzero structure mirroring the weight and bias shapes.
struct Mask {
    std::vector<std::vector<std::uint8_t>> w;
    std::vector<std::vector<std::uint8_t>> b;
};

/// Bound s on the number of nonzero entries of the flat parameter vector.
struct SparsityBudget {
    std::size_t s = 0;
};

/// Feedforward ReLU network f = A_{L+1} o sigma o A_L o ... o sigma o A_1.
/// weights[l] has shape widths[l+1] x widths[l]; biases[l] has length
/// widths[l+1]. When a mask is present, parameters at zero mask positions are
/// exactly zero and stay zero through training.
struct Mlp {
    Architecture arch;
    std::vector<Matrix> weights;
    std::vector<Vector> biases;
    std::optional<Mask> mask;

    static Mlp zeros(const Architecture& arch);
    /// Kaiming-uniform-equivalent init: weights U(-sqrt(6/fan_in), sqrt(6/fan_in)),
    /// biases U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
    static Mlp random(const Architecture& arch, Rng& rng);

    /// Installs an all-ones mask if none is present.
    void ensure_mask();
    /// Zeroes every parameter at a masked position.
    void apply_mask();
};

/// Gradient (or any parameter-shaped buffer) for an Mlp.
struct MlpGrad {
    std::vector<Matrix> w;
    std::vector<Vector> b;

    static MlpGrad zeros_like(const Mlp& net);
    void zero();
};

/// Flat view of one parameter tensor, used by the optimizer and pruning.
struct TensorView {
    double* values = nullptr;
    std::uint8_t* mask = nullptr;  // null means all positions trainable
    std::size_t size = 0;
    bool is_bias = false;
    int fan_in = 0;
};

std::vector<TensorView> tensor_views(Mlp& net);
std::vector<TensorView> tensor_views(MlpGrad& grad);

enum class LossKind { Squared, CrossEntropy };

/// Training targets: a real matrix for squared loss, class indices for
/// cross-entropy.
struct Targets {
    LossKind kind = LossKind::Squared;
    Matrix values;
    std::vector<int> labels;

    static Targets squared(Matrix y);
    static Targets classes(std::vector<int> y);
    std::size_t count() const { return kind == LossKind::Squared ? values.rows : labels.size(); }
};

/// Exact forward pass for a single input vector.
Vector forward(const Mlp& net, std::span<const double> x);

/// Forward pass for a batch (rows of x are samples). Returns n x p_out.
Matrix forward_batch(const Mlp& net, const Matrix& x);

/// Flat parameter vector Theta(f) ordered (vec(W1), b1, ..., vec(W_{L+1}), b_{L+1}).
Vector param_vector(const Mlp& net);

/// Inverse of param_vector; throws on length mismatch.
void set_param_vector(Mlp& net, std::span<const double> theta);

std::size_t nonzero_count(const Mlp& net);

/// Batch-mean loss and exact reverse-mode gradient. ReLU subgradient at a
/// pre-activation of exactly zero is zero; masked positions receive zero
/// gradient. grad may be null when only the loss is needed.
double mlp_loss_and_grad(const Mlp& net, const Matrix& x, const Targets& y, MlpGrad* grad);

/// Per-layer activations kept for reverse mode. act[0] is the input batch,
/// act[l] the post-ReLU output of layer l, act[L+1] the network output;
/// pre[l] the pre-activation of layer l+1.
struct ForwardTrace {
    std::vector<Matrix> act;
    std::vector<Matrix> pre;
    const Matrix& output() const { return act.back(); }
};

ForwardTrace forward_trace(const Mlp& net, const Matrix& x);

/// Reverse mode from an upstream gradient on the outputs. Accumulates into
/// grad (call grad.zero() first if needed); optionally writes the gradient
/// with respect to the input batch.
void backward_from(const Mlp& net, const ForwardTrace& trace, const Matrix& delta_out,
                   MlpGrad& grad, Matrix* delta_input);

/// Gradient of mean_loss with respect to the prediction matrix.
Matrix loss_gradient(const Matrix& predictions, const Targets& y);

/// Mean loss without gradients (squared error or cross-entropy on scores).
double mean_loss(const Matrix& predictions, const Targets& y);

/// Truncation operator: clamps y to [-B, B].
double truncate(double y, double bound);

}  // namespace penn
