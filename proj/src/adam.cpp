#include "penn/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace penn {

AdamState AdamState::for_views(const std::vector<TensorView>& views, AdamConfig cfg) {
    AdamState st;
    st.hyper = cfg;
    for (const auto& view : views) {
        st.m.emplace_back(view.size, 0.0);
        st.v.emplace_back(view.size, 0.0);
    }
    return st;
}

void adam_step(AdamState& state, std::vector<TensorView>& params,
               const std::vector<TensorView>& grads) {
    if (params.size() != grads.size() || params.size() != state.m.size()) {
        throw std::invalid_argument("adam_step: tensor count mismatch");
    }
    state.t += 1;
    const auto& h = state.hyper;
    const double bc1 = 1.0 - std::pow(h.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(h.beta2, static_cast<double>(state.t));
    for (std::size_t ti = 0; ti < params.size(); ++ti) {
        TensorView& p = params[ti];
        const TensorView& g = grads[ti];
        if (p.size != g.size || p.size != state.m[ti].size()) {
            throw std::invalid_argument("adam_step: tensor size mismatch at index " +
                                        std::to_string(ti));
        }
        double* m = state.m[ti].data();
        double* v = state.v[ti].data();
        for (std::size_t i = 0; i < p.size; ++i) {
            if (p.mask && !p.mask[i]) continue;
            const double gi = g.values[i];
            m[i] = h.beta1 * m[i] + (1.0 - h.beta1) * gi;
            v[i] = h.beta2 * v[i] + (1.0 - h.beta2) * gi * gi;
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            p.values[i] -= h.learning_rate * mhat / (std::sqrt(vhat) + h.epsilon);
        }
    }
}

}  // namespace penn
