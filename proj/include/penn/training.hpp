#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "penn/adam.hpp"
#include "penn/mlp.hpp"
#include "penn/penn_net.hpp"
#include "penn/rng.hpp"

namespace penn {

/// Protocol hyperparameters: a dense warm phase, a grid of kept-weight
/// proportions lambda, and early stopping that fires when the validation
/// loss fails to improve by at least delta for patience consecutive epochs.
struct TrainConfig {
    int warm_epochs = 10;
    std::vector<double> lambda_grid = {0.1, 0.2, 0.4, 0.8};
    double early_stop_delta = 0.001;
    int early_stop_patience = 10;
    int max_epochs = 500;
    int batch_size = 128;
    AdamConfig adam;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Rows for one split. The plain network reads z only; the pattern-embedded
/// network reads z and omega (0/1 entries stored as doubles).
struct TrainData {
    Matrix z;
    Matrix omega;
    Targets y;

    std::size_t size() const { return y.count(); }
};

struct EpochCurve {
    std::vector<double> train_loss;
    std::vector<double> val_loss;
};

template <typename Net>
struct EarlyStopResult {
    Net network;  // snapshot achieving the best validation loss
    int stop_epoch = 0;
    double best_val_loss = std::numeric_limits<double>::infinity();
    EpochCurve curve;
};

template <typename Net>
struct LambdaResult {
    double lambda = 1.0;
    Net network;
    int stop_epoch = 0;
    double val_loss = std::numeric_limits<double>::infinity();
    EpochCurve curve;
};

template <typename Net>
struct TrainReport {
    std::vector<LambdaResult<Net>> per_lambda;
    std::size_t selected_index = 0;
    double selected_lambda = 1.0;
    double selected_val_loss = std::numeric_limits<double>::infinity();
    double wall_clock_seconds = 0.0;  // informational only, never serialized

    const Net& selected() const { return per_lambda[selected_index].network; }
};

/// Mean loss of the network on a full split.
double eval_loss(const Mlp& net, const TrainData& data);
double eval_loss(const Penn& net, const TrainData& data);

/// Index of the winning (lambda, validation loss) pair: minimal loss, ties
/// resolved to the smallest lambda.
std::size_t select_lambda_index(const std::vector<std::pair<double, double>>& lambda_and_loss);

/// The stopping rule on the per-epoch running-best validation losses: fires
/// once the best has failed to improve by at least delta over the last
/// `patience` epochs.
bool should_stop(const std::vector<double>& best_history, int patience, double delta);

/// Exactly warm_epochs passes of shuffled mini-batch Adam, densely (no mask).
template <typename Net>
Net warm_train(Net net, const TrainData& train, const TrainConfig& cfg, Rng& rng);

/// Keeps the ceil(lambda * W) weights of largest magnitude, pooled across all
/// weight matrices (and across the three subnetworks of a Penn), plus every
/// bias; everything else is masked to exact zero. Ties break toward the
/// earlier flat index.
template <typename Net>
void magnitude_prune(Net& net, double lambda);

/// Redraws the surviving weights and all biases from the initialization law;
/// masked positions stay zero and the mask is unchanged.
template <typename Net>
void reinitialize_survivors(Net& net, Rng& rng);

template <typename Net>
EarlyStopResult<Net> train_with_early_stopping(Net net, const TrainData& train,
                                               const TrainData& validation, const TrainConfig& cfg,
                                               Rng& rng);

/// The full recipe: one warm phase, then per lambda prune -> reinitialize ->
/// retrain with early stopping; selects the lambda with the smallest recorded
/// validation loss (ties to the smallest lambda).
template <typename Net>
TrainReport<Net> lambda_sweep(const std::function<Net(Rng&)>& builder, const TrainData& train,
                              const TrainData& validation, const TrainConfig& cfg);

}  // namespace penn
