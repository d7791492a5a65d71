#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "tabsynth/mlp.hpp"

namespace tabsynth {

struct GradCheckResult {
    double max_rel_err = 0.0;
    std::size_t checked = 0;
};

// Central finite-difference check of analytic parameter gradients.
// `loss_fn` must be a deterministic function of the parameters (reseed any
// internal randomness per call). Relative error uses max(|a|,|n|) as the
// scale; pairs below `abs_floor` in both are compared absolutely.
inline GradCheckResult grad_check(ParamSet& params,
                                  const std::function<double(const ParamSet&)>& loss_fn,
                                  const ParamSet& analytic, double step = 1e-5,
                                  double abs_floor = 1e-3) {
    check_same_shapes(params, analytic, "grad_check");
    GradCheckResult res;
    for (std::size_t l = 0; l < params.size(); ++l) {
        auto probe = [&](double& p, double a) {
            double orig = p;
            p = orig + step;
            double up = loss_fn(params);
            p = orig - step;
            double down = loss_fn(params);
            p = orig;
            double num = (up - down) / (2.0 * step);
            double scale = std::max(std::abs(a), std::abs(num));
            double err = scale > abs_floor ? std::abs(a - num) / scale
                                           : std::abs(a - num) / abs_floor;
            res.max_rel_err = std::max(res.max_rel_err, err);
            res.checked += 1;
        };
        for (std::size_t i = 0; i < params[l].w.data.size(); ++i)
            probe(params[l].w.data[i], analytic[l].w.data[i]);
        for (std::size_t i = 0; i < params[l].b.size(); ++i)
            probe(params[l].b[i], analytic[l].b[i]);
    }
    return res;
}

}  // namespace tabsynth
