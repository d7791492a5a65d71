#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "tabsynth/matrix.hpp"
#include "tabsynth/mlp.hpp"

namespace tabsynth {

struct LossResult {
    double value = 0.0;
    Matrix grad;  // d value / d prediction (or logits), same shape as the input
};

// Mean squared error, mean-reduced over every element.
inline LossResult mse(const Matrix& pred, const Matrix& target) {
    if (!pred.same_shape(target)) throw std::invalid_argument("mse: shape mismatch");
    LossResult r;
    r.grad = Matrix(pred.rows, pred.cols);
    if (pred.data.empty()) return r;
    double n = static_cast<double>(pred.data.size());
    for (std::size_t i = 0; i < pred.data.size(); ++i) {
        double d = pred.data[i] - target.data[i];
        r.value += d * d;
        r.grad.data[i] = 2.0 * d / n;
    }
    r.value /= n;
    return r;
}

// Binary cross entropy on logits, targets in {0,1}, mean-reduced over every
// element. Uses the stable softplus form.
inline LossResult bce_with_logits(const Matrix& logits, const Matrix& target) {
    if (!logits.same_shape(target)) throw std::invalid_argument("bce_with_logits: shape mismatch");
    LossResult r;
    r.grad = Matrix(logits.rows, logits.cols);
    if (logits.data.empty()) return r;
    double n = static_cast<double>(logits.data.size());
    for (std::size_t i = 0; i < logits.data.size(); ++i) {
        double z = logits.data[i];
        double t = target.data[i];
        // max(z,0) - t*z + log(1 + exp(-|z|))
        r.value += std::max(z, 0.0) - t * z + std::log1p(std::exp(-std::abs(z)));
        r.grad.data[i] = (sigmoid(z) - t) / n;
    }
    r.value /= n;
    return r;
}

// Cross entropy on logits with integer class targets, mean-reduced over the
// batch. Log-sum-exp is shifted by the row maximum.
inline LossResult ce_with_logits(const Matrix& logits, const std::vector<int>& classes) {
    if (logits.rows != classes.size()) throw std::invalid_argument("ce_with_logits: batch size mismatch");
    LossResult r;
    r.grad = Matrix(logits.rows, logits.cols);
    if (logits.rows == 0) return r;
    double n = static_cast<double>(logits.rows);
    for (std::size_t i = 0; i < logits.rows; ++i) {
        int y = classes[i];
        if (y < 0 || static_cast<std::size_t>(y) >= logits.cols)
            throw std::invalid_argument("ce_with_logits: class index out of range");
        const double* z = logits.row_ptr(i);
        double zmax = z[0];
        for (std::size_t k = 1; k < logits.cols; ++k) zmax = std::max(zmax, z[k]);
        double sum = 0.0;
        for (std::size_t k = 0; k < logits.cols; ++k) sum += std::exp(z[k] - zmax);
        double lse = zmax + std::log(sum);
        r.value += lse - z[y];
        double* g = r.grad.row_ptr(i);
        for (std::size_t k = 0; k < logits.cols; ++k)
            g[k] = (std::exp(z[k] - zmax) / sum - (static_cast<int>(k) == y ? 1.0 : 0.0)) / n;
    }
    r.value /= n;
    return r;
}

}  // namespace tabsynth
