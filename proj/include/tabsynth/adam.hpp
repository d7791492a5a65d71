#pragma once

#include <cmath>
#include <cstdint>

#include "tabsynth/mlp.hpp"

namespace tabsynth {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    AdamConfig cfg;
    ParamSet m;  // first moments
    ParamSet v;  // second moments
    std::int64_t step = 0;

    static AdamState make(const ParamSet& params, AdamConfig cfg = {}) {
        AdamState s;
        s.cfg = cfg;
        s.m = zeros_like(params);
        s.v = zeros_like(params);
        return s;
    }
};

// Bias-corrected Adam update; deterministic for a given gradient sequence.
inline void adam_step(ParamSet& params, const ParamSet& grads, AdamState& state) {
    check_same_shapes(params, grads, "adam_step");
    check_same_shapes(params, state.m, "adam_step moments");
    state.step += 1;
    const AdamConfig& c = state.cfg;
    double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
    double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
    for (std::size_t l = 0; l < params.size(); ++l) {
        auto update = [&](double& p, double& m, double& v, double g) {
            m = c.beta1 * m + (1.0 - c.beta1) * g;
            v = c.beta2 * v + (1.0 - c.beta2) * g * g;
            double mhat = m / bc1;
            double vhat = v / bc2;
            p -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
        };
        for (std::size_t i = 0; i < params[l].w.data.size(); ++i)
            update(params[l].w.data[i], state.m[l].w.data[i], state.v[l].w.data[i], grads[l].w.data[i]);
        for (std::size_t i = 0; i < params[l].b.size(); ++i)
            update(params[l].b[i], state.m[l].b[i], state.v[l].b[i], grads[l].b[i]);
    }
}

}  // namespace tabsynth
