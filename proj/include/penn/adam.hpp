#pragma once

#include <vector>

#include "penn/mlp.hpp"

namespace penn {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Bias-corrected Adam accumulators, one (m, v) pair per parameter tensor,
/// aligned with the tensor_views() order of the network being trained.
struct AdamState {
    AdamConfig hyper;
    std::vector<Vector> m;
    std::vector<Vector> v;
    long long t = 0;

    static AdamState for_views(const std::vector<TensorView>& views, AdamConfig cfg = {});
};

/// One Adam update. Masked positions are skipped entirely, so parameters at
/// zero mask positions stay exactly zero.
void adam_step(AdamState& state, std::vector<TensorView>& params,
               const std::vector<TensorView>& grads);

}  // namespace penn
