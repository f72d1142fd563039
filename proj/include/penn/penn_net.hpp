#pragma once

#include "penn/mlp.hpp"

namespace penn {

/// Pattern embedded neural network f(z, omega) = f3(f1(z), f2(omega)).
/// f1 reads the imputed covariates, f2 embeds the revelation vector into
/// R^m, and f3 combines the concatenated outputs. The combiner input width
/// must equal f1's output width plus f2's output width; the three
/// subnetworks share one sparsity budget.
struct Penn {
    Mlp f1;
    Mlp f2;
    Mlp f3;
    SparsityBudget budget;

    int covariate_dim() const { return f1.arch.input_dim(); }
    int embedding_dim() const { return f2.arch.output_dim(); }
    int output_dim() const { return f3.arch.output_dim(); }

    /// Checks the dimension-compatibility constraints; throws on violation.
    void validate() const;

    void ensure_mask();
    void apply_mask();
};

struct PennGrad {
    MlpGrad g1;
    MlpGrad g2;
    MlpGrad g3;

    static PennGrad zeros_like(const Penn& net);
    void zero();
};

std::vector<TensorView> tensor_views(Penn& net);
std::vector<TensorView> tensor_views(PennGrad& grad);

std::size_t nonzero_count(const Penn& net);

Vector penn_forward(const Penn& net, std::span<const double> z, std::span<const double> omega);

/// Batch version: rows of z and omega are paired samples.
Matrix penn_forward_batch(const Penn& net, const Matrix& z, const Matrix& omega);

/// The embedding function f2 applied to a revelation vector.
Vector embed(const Penn& net, std::span<const double> omega);

/// Batch-mean loss with exact gradients for all three subnetworks. The
/// gradient flowing into the concatenation splits into the f1 and f2 blocks.
double penn_loss_and_grad(const Penn& net, const Matrix& z, const Matrix& omega, const Targets& y,
                          PennGrad* grad);

enum class TaskKind { Regression, Classification };

struct Task {
    TaskKind kind = TaskKind::Regression;
    int classes = 0;  // classification only

    static Task regression() { return {TaskKind::Regression, 0}; }
    static Task classification(int c) { return {TaskKind::Classification, c}; }
    int output_dim() const { return kind == TaskKind::Regression ? 1 : classes; }
    LossKind loss() const {
        return kind == TaskKind::Regression ? LossKind::Squared : LossKind::CrossEntropy;
    }
};

/// The experiments' PENN: f1 = (3, (d, w, w, w, w)), f2 = (2, (d, 30, 30, 3)),
/// f3 = (3, (w+3, w, w, w, out)). Width 70 for the simulated runs, 100 for
/// the larger variant.
Penn build_paper_penn(int d, const Task& task, Rng& rng, int width = 70);

/// The matching plain network: (6, (d, w, w, w, w, w, w, out)).
Mlp build_paper_nn(int d, const Task& task, Rng& rng, int width = 70);

}  // namespace penn
