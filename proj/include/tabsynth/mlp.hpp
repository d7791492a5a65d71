#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "tabsynth/matrix.hpp"
#include "tabsynth/rng.hpp"

namespace tabsynth {

enum class Activation { Identity, ReLU, ELU, SiLU, Sigmoid };

inline const char* activation_name(Activation a) {
    switch (a) {
        case Activation::Identity: return "identity";
        case Activation::ReLU: return "relu";
        case Activation::ELU: return "elu";
        case Activation::SiLU: return "silu";
        case Activation::Sigmoid: return "sigmoid";
    }
    return "?";
}

inline Activation activation_from_name(const std::string& s) {
    if (s == "identity") return Activation::Identity;
    if (s == "relu") return Activation::ReLU;
    if (s == "elu") return Activation::ELU;
    if (s == "silu") return Activation::SiLU;
    if (s == "sigmoid") return Activation::Sigmoid;
    throw std::invalid_argument("unknown activation: " + s);
}

inline double sigmoid(double x) {
    return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

inline double apply_activation(Activation a, double z) {
    switch (a) {
        case Activation::Identity: return z;
        case Activation::ReLU: return z > 0 ? z : 0.0;
        case Activation::ELU: return z > 0 ? z : std::expm1(z);
        case Activation::SiLU: return z * sigmoid(z);
        case Activation::Sigmoid: return sigmoid(z);
    }
    return z;
}

// Derivative as a function of the pre-activation z.
inline double activation_grad(Activation a, double z) {
    switch (a) {
        case Activation::Identity: return 1.0;
        case Activation::ReLU: return z > 0 ? 1.0 : 0.0;
        case Activation::ELU: return z > 0 ? 1.0 : std::exp(z);
        case Activation::SiLU: {
            double s = sigmoid(z);
            return s * (1.0 + z * (1.0 - s));
        }
        case Activation::Sigmoid: {
            double s = sigmoid(z);
            return s * (1.0 - s);
        }
    }
    return 1.0;
}

struct LayerSpec {
    std::size_t width = 0;
    Activation act = Activation::Identity;
    double dropout = 0.0;  // applied after the activation, train mode only
};

struct MlpSpec {
    std::size_t in_width = 0;
    std::vector<LayerSpec> layers;

    std::size_t out_width() const { return layers.empty() ? in_width : layers.back().width; }

    void validate() const {
        if (layers.empty()) throw std::invalid_argument("MlpSpec: needs at least one layer");
        if (in_width == 0) throw std::invalid_argument("MlpSpec: zero input width");
        for (const auto& l : layers) {
            if (l.width == 0) throw std::invalid_argument("MlpSpec: zero layer width");
            if (l.dropout < 0.0 || l.dropout >= 1.0)
                throw std::invalid_argument("MlpSpec: dropout must be in [0,1)");
        }
    }
};

// One dense layer's parameters: weight (out x in) and bias (out).
struct Dense {
    Matrix w;
    std::vector<double> b;
};

// Ordered parameter list. Score networks and the GAN reuse this container
// with their own layer orderings, so persistence and Adam stay generic.
using ParamSet = std::vector<Dense>;

inline std::size_t param_count(const ParamSet& p) {
    std::size_t n = 0;
    for (const auto& d : p) n += d.w.data.size() + d.b.size();
    return n;
}

inline ParamSet zeros_like(const ParamSet& p) {
    ParamSet z;
    z.reserve(p.size());
    for (const auto& d : p) z.push_back({Matrix(d.w.rows, d.w.cols), std::vector<double>(d.b.size(), 0.0)});
    return z;
}

// Visits every scalar parameter in declaration order.
template <typename F>
void for_each_param(ParamSet& p, F&& f) {
    for (auto& d : p) {
        for (double& v : d.w.data) f(v);
        for (double& v : d.b) f(v);
    }
}

template <typename F>
void for_each_param(const ParamSet& p, F&& f) {
    for (const auto& d : p) {
        for (double v : d.w.data) f(v);
        for (double v : d.b) f(v);
    }
}

inline void check_same_shapes(const ParamSet& a, const ParamSet& b, const char* what) {
    if (a.size() != b.size()) throw std::invalid_argument(std::string(what) + ": layer count mismatch");
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!a[i].w.same_shape(b[i].w) || a[i].b.size() != b[i].b.size())
            throw std::invalid_argument(std::string(what) + ": shape mismatch at layer " + std::to_string(i));
}

inline void accumulate(ParamSet& acc, const ParamSet& g, double scale = 1.0) {
    check_same_shapes(acc, g, "accumulate");
    for (std::size_t i = 0; i < acc.size(); ++i) {
        axpy(scale, g[i].w, acc[i].w);
        for (std::size_t j = 0; j < acc[i].b.size(); ++j) acc[i].b[j] += scale * g[i].b[j];
    }
}

// Kaiming-style fan-in uniform init, zero bias.
inline Dense init_dense(std::size_t out, std::size_t in, Rng& rng) {
    Dense d{Matrix(out, in), std::vector<double>(out, 0.0)};
    double bound = std::sqrt(6.0 / static_cast<double>(in));
    for (double& v : d.w.data) v = rng.uniform(-bound, bound);
    return d;
}

inline ParamSet init_mlp_params(const MlpSpec& spec, Rng& rng) {
    spec.validate();
    ParamSet p;
    std::size_t in = spec.in_width;
    for (const auto& l : spec.layers) {
        p.push_back(init_dense(l.width, in, rng));
        in = l.width;
    }
    return p;
}

enum class Mode { Train, Eval };

// Activation record for exact backprop: input, per-layer pre-activations
// and post-activation/post-dropout outputs, and dropout keep masks.
struct MlpCache {
    MlpSpec spec;
    Mode mode = Mode::Eval;
    Matrix input;
    std::vector<Matrix> pre;        // z_l = a_{l-1} W_l^T + b_l
    std::vector<Matrix> post;       // after activation and dropout
    std::vector<Matrix> drop_mask;  // empty matrix when layer has no dropout
};

inline Matrix mlp_forward(const MlpSpec& spec, const ParamSet& params, const Matrix& input,
                          Mode mode, Rng* rng = nullptr, MlpCache* cache = nullptr) {
    spec.validate();
    if (params.size() != spec.layers.size())
        throw std::invalid_argument("mlp_forward: params do not match spec");
    if (input.cols != spec.in_width)
        throw std::invalid_argument("mlp_forward: input width " + std::to_string(input.cols) +
                                    " != spec input width " + std::to_string(spec.in_width));
    if (!input.all_finite()) throw std::invalid_argument("mlp_forward: non-finite input");

    if (cache) {
        cache->spec = spec;
        cache->mode = mode;
        cache->input = input;
        cache->pre.clear();
        cache->post.clear();
        cache->drop_mask.clear();
    }

    Matrix a = input;
    for (std::size_t l = 0; l < spec.layers.size(); ++l) {
        const LayerSpec& ls = spec.layers[l];
        if (params[l].w.cols != a.cols || params[l].w.rows != ls.width)
            throw std::invalid_argument("mlp_forward: parameter shape mismatch at layer " + std::to_string(l));
        Matrix z = matmul_nt(a, params[l].w);
        add_bias_rows(z, params[l].b);
        if (cache) cache->pre.push_back(z);

        Matrix h(z.rows, z.cols);
        for (std::size_t i = 0; i < z.data.size(); ++i) h.data[i] = apply_activation(ls.act, z.data[i]);

        Matrix mask;
        if (ls.dropout > 0.0 && mode == Mode::Train) {
            if (!rng) throw std::invalid_argument("mlp_forward: dropout in train mode needs an rng");
            // Inverted dropout: kept units are scaled by 1/(1-p) so eval
            // mode needs no rescaling.
            mask = Matrix(h.rows, h.cols);
            double keep = 1.0 - ls.dropout;
            for (std::size_t i = 0; i < mask.data.size(); ++i)
                mask.data[i] = rng->uniform() < keep ? 1.0 / keep : 0.0;
            h = hadamard(h, mask);
        }
        if (cache) {
            cache->post.push_back(h);
            cache->drop_mask.push_back(std::move(mask));
        }
        a = std::move(h);
    }
    return a;
}

struct MlpBackwardResult {
    ParamSet param_grads;
    Matrix grad_input;
};

inline MlpBackwardResult mlp_backward(const MlpCache& cache, const ParamSet& params,
                                      const Matrix& grad_output) {
    const MlpSpec& spec = cache.spec;
    if (cache.pre.size() != spec.layers.size() || params.size() != spec.layers.size())
        throw std::invalid_argument("mlp_backward: stale or incompatible cache");
    if (grad_output.rows != cache.input.rows || grad_output.cols != spec.out_width())
        throw std::invalid_argument("mlp_backward: grad_output shape mismatch");

    MlpBackwardResult out;
    out.param_grads = zeros_like(params);

    Matrix g = grad_output;
    for (std::size_t li = spec.layers.size(); li-- > 0;) {
        const LayerSpec& ls = spec.layers[li];
        if (ls.dropout > 0.0 && cache.mode == Mode::Train) g = hadamard(g, cache.drop_mask[li]);

        const Matrix& z = cache.pre[li];
        Matrix gz(g.rows, g.cols);
        for (std::size_t i = 0; i < g.data.size(); ++i)
            gz.data[i] = g.data[i] * activation_grad(ls.act, z.data[i]);

        const Matrix& a_prev = li == 0 ? cache.input : cache.post[li - 1];
        out.param_grads[li].w = matmul_tn(gz, a_prev);
        out.param_grads[li].b = col_sums(gz);
        g = matmul(gz, params[li].w);
    }
    out.grad_input = std::move(g);
    return out;
}

}  // namespace tabsynth
