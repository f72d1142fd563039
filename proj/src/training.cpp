#include "penn/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace penn {

void TrainConfig::validate() const {
    if (warm_epochs < 0) throw std::invalid_argument("train config: warm_epochs must be >= 0");
    if (lambda_grid.empty()) throw std::invalid_argument("train config: empty lambda grid");
    for (double l : lambda_grid) {
        if (!(l > 0.0 && l <= 1.0)) {
            throw std::invalid_argument("train config: lambda must lie in (0, 1]");
        }
    }
    if (early_stop_delta < 0.0) throw std::invalid_argument("train config: delta must be >= 0");
    if (early_stop_patience < 1) throw std::invalid_argument("train config: patience must be >= 1");
    if (max_epochs < 1) throw std::invalid_argument("train config: max_epochs must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("train config: batch_size must be >= 1");
}

namespace {

Matrix gather_rows(const Matrix& m, const std::vector<std::size_t>& order, std::size_t begin,
                   std::size_t end) {
    Matrix out(end - begin, m.cols);
    for (std::size_t i = begin; i < end; ++i) {
        const double* src = m.row_ptr(order[i]);
        std::copy(src, src + m.cols, out.row_ptr(i - begin));
    }
    return out;
}

Targets gather_targets(const Targets& y, const std::vector<std::size_t>& order, std::size_t begin,
                       std::size_t end) {
    if (y.kind == LossKind::Squared) {
        return Targets::squared(gather_rows(y.values, order, begin, end));
    }
    std::vector<int> labels(end - begin);
    for (std::size_t i = begin; i < end; ++i) labels[i - begin] = y.labels[order[i]];
    return Targets::classes(std::move(labels));
}

template <typename Net>
struct NetOps;

template <>
struct NetOps<Mlp> {
    using Grad = MlpGrad;
    static Grad make_grad(const Mlp& net) { return MlpGrad::zeros_like(net); }
    static double loss_and_grad(const Mlp& net, const Matrix& z, const Matrix&, const Targets& y,
                                Grad* g) {
        return mlp_loss_and_grad(net, z, y, g);
    }
};

template <>
struct NetOps<Penn> {
    using Grad = PennGrad;
    static Grad make_grad(const Penn& net) { return PennGrad::zeros_like(net); }
    static double loss_and_grad(const Penn& net, const Matrix& z, const Matrix& omega,
                                const Targets& y, Grad* g) {
        return penn_loss_and_grad(net, z, omega, y, g);
    }
};

/// One shuffled pass of mini-batch Adam; returns the batch-weighted mean
/// training loss seen during the pass.
template <typename Net>
double run_epoch(Net& net, const TrainData& train, const TrainConfig& cfg, AdamState& adam,
                 typename NetOps<Net>::Grad& grad, std::vector<std::size_t>& order, Rng& rng,
                 int epoch) {
    const std::size_t n = train.size();
    rng.shuffle(order);
    double weighted_loss = 0.0;
    const bool uses_omega = train.omega.rows == n;
    for (std::size_t begin = 0; begin < n; begin += cfg.batch_size) {
        const std::size_t end = std::min(n, begin + cfg.batch_size);
        Matrix bz = gather_rows(train.z, order, begin, end);
        Matrix bo = uses_omega ? gather_rows(train.omega, order, begin, end) : Matrix();
        Targets by = gather_targets(train.y, order, begin, end);
        double loss;
        try {
            loss = NetOps<Net>::loss_and_grad(net, bz, bo, by, &grad);
        } catch (const std::runtime_error& e) {
            throw std::runtime_error("training aborted at epoch " + std::to_string(epoch) +
                                     ", batch " + std::to_string(begin / cfg.batch_size + 1) +
                                     ": " + e.what());
        }
        auto params = tensor_views(net);
        auto grads = tensor_views(grad);
        adam_step(adam, params, grads);
        weighted_loss += loss * static_cast<double>(end - begin);
    }
    return weighted_loss / static_cast<double>(n);
}

}  // namespace

double eval_loss(const Mlp& net, const TrainData& data) {
    return mean_loss(forward_batch(net, data.z), data.y);
}

double eval_loss(const Penn& net, const TrainData& data) {
    return mean_loss(penn_forward_batch(net, data.z, data.omega), data.y);
}

std::size_t select_lambda_index(const std::vector<std::pair<double, double>>& lambda_and_loss) {
    if (lambda_and_loss.empty()) throw std::invalid_argument("select_lambda_index: empty");
    std::size_t best = 0;
    for (std::size_t i = 1; i < lambda_and_loss.size(); ++i) {
        const auto& [lambda, loss] = lambda_and_loss[i];
        const auto& [best_lambda, best_loss] = lambda_and_loss[best];
        if (loss < best_loss || (loss == best_loss && lambda < best_lambda)) best = i;
    }
    return best;
}

bool should_stop(const std::vector<double>& best_history, int patience, double delta) {
    const std::size_t e = best_history.size();
    if (e <= static_cast<std::size_t>(patience)) return false;
    return best_history[e - 1] > best_history[e - 1 - patience] - delta;
}

template <typename Net>
Net warm_train(Net net, const TrainData& train, const TrainConfig& cfg, Rng& rng) {
    cfg.validate();
    if (train.size() == 0) throw std::invalid_argument("warm_train: empty training set");
    auto grad = NetOps<Net>::make_grad(net);
    AdamState adam = AdamState::for_views(tensor_views(net), cfg.adam);
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);
    for (int epoch = 1; epoch <= cfg.warm_epochs; ++epoch) {
        run_epoch(net, train, cfg, adam, grad, order, rng, epoch);
    }
    return net;
}

template <typename Net>
void magnitude_prune(Net& net, double lambda) {
    if (!(lambda > 0.0 && lambda <= 1.0)) {
        throw std::invalid_argument("magnitude_prune: lambda must lie in (0, 1]");
    }
    net.ensure_mask();
    auto views = tensor_views(net);

    std::size_t total_weights = 0;
    for (const auto& v : views) {
        if (!v.is_bias) total_weights += v.size;
    }
    const auto keep =
        static_cast<std::size_t>(std::ceil(lambda * static_cast<double>(total_weights) - 1e-9));

    std::vector<double> magnitude(total_weights);
    std::vector<std::size_t> flat(total_weights);
    std::size_t pos = 0;
    for (const auto& v : views) {
        if (v.is_bias) continue;
        for (std::size_t i = 0; i < v.size; ++i, ++pos) {
            magnitude[pos] = std::abs(v.values[i]);
            flat[pos] = pos;
        }
    }
    std::sort(flat.begin(), flat.end(), [&](std::size_t a, std::size_t b) {
        if (magnitude[a] != magnitude[b]) return magnitude[a] > magnitude[b];
        return a < b;  // earlier flat index survives
    });
    std::vector<std::uint8_t> survives(total_weights, 0);
    for (std::size_t r = 0; r < keep && r < total_weights; ++r) survives[flat[r]] = 1;

    pos = 0;
    for (auto& v : views) {
        if (v.is_bias) {
            std::fill(v.mask, v.mask + v.size, std::uint8_t{1});
        } else {
            for (std::size_t i = 0; i < v.size; ++i, ++pos) v.mask[i] = survives[pos];
        }
    }
    net.apply_mask();
    if constexpr (std::is_same_v<Net, Penn>) {
        std::size_t bias_total = 0;
        for (const auto& v : views) {
            if (v.is_bias) bias_total += v.size;
        }
        net.budget.s = keep + bias_total;  // budget established at masking time
    }
}

template <typename Net>
void reinitialize_survivors(Net& net, Rng& rng) {
    bool has_mask;
    if constexpr (std::is_same_v<Net, Penn>) {
        has_mask = net.f1.mask && net.f2.mask && net.f3.mask;
    } else {
        has_mask = net.mask.has_value();
    }
    if (!has_mask) {
        throw std::invalid_argument("reinitialize_survivors: prune the network first");
    }
    auto views = tensor_views(net);
    for (auto& v : views) {
        const double bound =
            v.is_bias ? 1.0 / std::sqrt(static_cast<double>(v.fan_in))
                      : std::sqrt(6.0 / static_cast<double>(v.fan_in));
        for (std::size_t i = 0; i < v.size; ++i) {
            if (!v.mask || v.mask[i]) v.values[i] = rng.uniform(-bound, bound);
        }
    }
}

template <typename Net>
EarlyStopResult<Net> train_with_early_stopping(Net net, const TrainData& train,
                                               const TrainData& validation, const TrainConfig& cfg,
                                               Rng& rng) {
    cfg.validate();
    if (train.size() == 0) throw std::invalid_argument("early stopping: empty training set");
    if (validation.size() == 0) throw std::invalid_argument("early stopping: empty validation set");

    auto grad = NetOps<Net>::make_grad(net);
    AdamState adam = AdamState::for_views(tensor_views(net), cfg.adam);
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);

    EarlyStopResult<Net> result;
    result.network = net;
    // best_history[e] is the best validation loss after e epochs; training
    // stops once the best fails to improve by at least delta over the last
    // `patience` epochs.
    std::vector<double> best_history;
    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        const double train_loss = run_epoch(net, train, cfg, adam, grad, order, rng, epoch);
        const double val_loss = eval_loss(net, validation);
        if (!std::isfinite(val_loss)) {
            throw std::runtime_error("early stopping: non-finite validation loss at epoch " +
                                     std::to_string(epoch));
        }
        result.curve.train_loss.push_back(train_loss);
        result.curve.val_loss.push_back(val_loss);
        result.stop_epoch = epoch;
        if (val_loss < result.best_val_loss) {
            result.best_val_loss = val_loss;
            result.network = net;
        }
        best_history.push_back(result.best_val_loss);
        if (should_stop(best_history, cfg.early_stop_patience, cfg.early_stop_delta)) break;
    }
    return result;
}

template <typename Net>
TrainReport<Net> lambda_sweep(const std::function<Net(Rng&)>& builder, const TrainData& train,
                              const TrainData& validation, const TrainConfig& cfg) {
    cfg.validate();
    const auto started = std::chrono::steady_clock::now();
    Rng root(cfg.seed);

    Rng init_rng = root.derive(0);
    Net initial = builder(init_rng);
    Rng warm_rng = root.derive(1);
    Net warm = warm_train(initial, train, cfg, warm_rng);

    TrainReport<Net> report;
    for (std::size_t li = 0; li < cfg.lambda_grid.size(); ++li) {
        const double lambda = cfg.lambda_grid[li];
        Rng branch_rng = root.derive(2 + li);
        Net net = warm;
        magnitude_prune(net, lambda);
        reinitialize_survivors(net, branch_rng);
        EarlyStopResult<Net> res =
            train_with_early_stopping(std::move(net), train, validation, cfg, branch_rng);

        LambdaResult<Net> lr;
        lr.lambda = lambda;
        lr.network = std::move(res.network);
        lr.stop_epoch = res.stop_epoch;
        lr.val_loss = res.best_val_loss;
        lr.curve = std::move(res.curve);
        report.per_lambda.push_back(std::move(lr));
    }

    std::vector<std::pair<double, double>> lambda_and_loss;
    for (const auto& lr : report.per_lambda) lambda_and_loss.emplace_back(lr.lambda, lr.val_loss);
    report.selected_index = select_lambda_index(lambda_and_loss);
    report.selected_lambda = report.per_lambda[report.selected_index].lambda;
    report.selected_val_loss = report.per_lambda[report.selected_index].val_loss;
    report.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
}

// The two network families the protocol trains.
template Mlp warm_train<Mlp>(Mlp, const TrainData&, const TrainConfig&, Rng&);
template Penn warm_train<Penn>(Penn, const TrainData&, const TrainConfig&, Rng&);
template void magnitude_prune<Mlp>(Mlp&, double);
template void magnitude_prune<Penn>(Penn&, double);
template void reinitialize_survivors<Mlp>(Mlp&, Rng&);
template void reinitialize_survivors<Penn>(Penn&, Rng&);
template EarlyStopResult<Mlp> train_with_early_stopping<Mlp>(Mlp, const TrainData&,
                                                             const TrainData&, const TrainConfig&,
                                                             Rng&);
template EarlyStopResult<Penn> train_with_early_stopping<Penn>(Penn, const TrainData&,
                                                               const TrainData&,
                                                               const TrainConfig&, Rng&);
template TrainReport<Mlp> lambda_sweep<Mlp>(const std::function<Mlp(Rng&)>&, const TrainData&,
                                            const TrainData&, const TrainConfig&);
template TrainReport<Penn> lambda_sweep<Penn>(const std::function<Penn(Rng&)>&, const TrainData&,
                                              const TrainData&, const TrainConfig&);

}  // namespace penn
