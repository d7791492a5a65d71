#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "tabsynth/matrix.hpp"
#include "tabsynth/mlp.hpp"
#include "tabsynth/rng.hpp"

namespace tabsynth {

enum class ScoreVariant { StasyConcatSquash, TabTimeMlp };

inline const char* score_variant_name(ScoreVariant v) {
    return v == ScoreVariant::StasyConcatSquash ? "stasy_concat_squash" : "tab_time_mlp";
}

inline ScoreVariant score_variant_from_name(const std::string& s) {
    if (s == "stasy_concat_squash") return ScoreVariant::StasyConcatSquash;
    if (s == "tab_time_mlp") return ScoreVariant::TabTimeMlp;
    throw std::invalid_argument("unknown score network variant '" + s + "'");
}

struct ScoreNetSpec {
    ScoreVariant variant = ScoreVariant::TabTimeMlp;
    std::size_t d = 0;
    std::vector<std::size_t> stasy_widths = {256, 512, 1024, 512, 256};
    std::size_t tab_proj = 128;
    std::size_t tab_blocks = 4;
    double tab_dropout = 0.0;
    std::size_t time_dim = 128;
    double time_scale = 1000.0;

    void validate() const {
        if (d == 0) throw std::invalid_argument("ScoreNetSpec: data width 0");
        if (variant == ScoreVariant::StasyConcatSquash) {
            if (stasy_widths.empty()) throw std::invalid_argument("ScoreNetSpec: no hidden widths");
            for (std::size_t w : stasy_widths)
                if (w == 0) throw std::invalid_argument("ScoreNetSpec: zero hidden width");
        } else {
            if (tab_proj == 0 || tab_blocks == 0)
                throw std::invalid_argument("ScoreNetSpec: zero projection width or block count");
            if (time_dim == 0 || time_dim % 2 != 0)
                throw std::invalid_argument("ScoreNetSpec: time embedding dim must be even");
            if (tab_dropout < 0.0 || tab_dropout >= 1.0)
                throw std::invalid_argument("ScoreNetSpec: dropout must be in [0,1)");
        }
    }

    // Widths of the running concatenation h_0..h_L; h_{i} = d_i + width(h_{i-1}).
    std::vector<std::size_t> stasy_concat_widths() const {
        std::vector<std::size_t> w{d};
        for (std::size_t di : stasy_widths) w.push_back(di + w.back());
        return w;
    }
};

inline std::vector<double> sinusoidal_time_embedding(double t, std::size_t dim,
                                                     double scale = 1000.0) {
    if (dim == 0 || dim % 2 != 0)
        throw std::invalid_argument("sinusoidal_time_embedding: dim must be positive and even");
    const std::size_t half = dim / 2;
    std::vector<double> out(dim);
    for (std::size_t k = 0; k < half; ++k) {
        const double w = std::exp(-std::log(10000.0) * static_cast<double>(k) /
                                  static_cast<double>(half));
        out[k] = std::sin(scale * t * w);
        out[half + k] = std::cos(scale * t * w);
    }
    return out;
}

// Per-variant forward state kept for the backward pass.
struct ScoreCache {
    Mode mode = Mode::Eval;
    std::vector<double> t;
    // concat-squash state
    std::vector<Matrix> acts;  // h_0..h_L, inputs to each layer and the head
    std::vector<Matrix> lin;   // Linear_i(h_{i-1})
    std::vector<Matrix> gate;  // sigmoid of the two time linears
    std::vector<Matrix> cat_pre;
    // time-MLP state
    Matrix emb, u1, s1, u2;
    Matrix sum_in;
    std::vector<Matrix> zs;
    std::vector<Matrix> drop_masks;
};

inline ParamSet init_score_params(const ScoreNetSpec& spec, Rng& rng) {
    spec.validate();
    ParamSet p;
    if (spec.variant == ScoreVariant::StasyConcatSquash) {
        std::size_t prev = spec.d;
        for (std::size_t di : spec.stasy_widths) {
            p.push_back(init_dense(di, prev, rng));
            p.push_back(init_dense(di, 1, rng));
            p.push_back(init_dense(di, 1, rng));
            prev += di;
        }
        p.push_back(init_dense(spec.d, prev, rng));
    } else {
        p.push_back(init_dense(spec.tab_proj, spec.time_dim, rng));
        p.push_back(init_dense(spec.tab_proj, spec.tab_proj, rng));
        p.push_back(init_dense(spec.tab_proj, spec.d, rng));
        for (std::size_t b = 0; b < spec.tab_blocks; ++b)
            p.push_back(init_dense(spec.tab_proj, spec.tab_proj, rng));
        p.push_back(init_dense(spec.d, spec.tab_proj, rng));
    }
    return p;
}

namespace detail {

inline Matrix dense_forward(const Dense& d, const Matrix& x) {
    Matrix z = matmul_nt(x, d.w);
    add_bias_rows(z, d.b);
    return z;
}

inline Matrix stasy_forward(const ScoreNetSpec& spec, const ParamSet& p, const Matrix& x,
                            const std::vector<double>& t, ScoreCache* cache) {
    const std::size_t L = spec.stasy_widths.size();
    if (p.size() != 3 * L + 1)
        throw std::invalid_argument("stasy forward: parameter count mismatch");
    Matrix h = x;
    if (cache) cache->acts.push_back(h);
    for (std::size_t i = 0; i < L; ++i) {
        const Dense& main = p[3 * i];
        const Dense& gate_lin = p[3 * i + 1];
        const Dense& tbias_lin = p[3 * i + 2];
        const std::size_t di = spec.stasy_widths[i];
        Matrix lin = dense_forward(main, h);
        Matrix g(x.rows, di);
        for (std::size_t r = 0; r < x.rows; ++r)
            for (std::size_t j = 0; j < di; ++j)
                g(r, j) = sigmoid(gate_lin.w(j, 0) * t[r] + gate_lin.b[j] +
                                  tbias_lin.w(j, 0) * t[r] + tbias_lin.b[j]);
        Matrix cat(x.rows, di + h.cols);
        for (std::size_t r = 0; r < x.rows; ++r) {
            double* dst = cat.row_ptr(r);
            const double* lr = lin.row_ptr(r);
            const double* gr = g.row_ptr(r);
            for (std::size_t j = 0; j < di; ++j) dst[j] = lr[j] * gr[j];
            const double* hr = h.row_ptr(r);
            for (std::size_t j = 0; j < h.cols; ++j) dst[di + j] = hr[j];
        }
        Matrix act(cat.rows, cat.cols);
        for (std::size_t k = 0; k < cat.data.size(); ++k)
            act.data[k] = apply_activation(Activation::ELU, cat.data[k]);
        if (cache) {
            cache->lin.push_back(std::move(lin));
            cache->gate.push_back(std::move(g));
            cache->cat_pre.push_back(std::move(cat));
            cache->acts.push_back(act);
        }
        h = std::move(act);
    }
    return dense_forward(p.back(), h);
}

inline ParamSet stasy_backward(const ScoreNetSpec& spec, const ScoreCache& cache,
                               const ParamSet& p, const Matrix& grad_out) {
    const std::size_t L = spec.stasy_widths.size();
    ParamSet grads = zeros_like(p);
    const Matrix& h_last = cache.acts[L];
    grads.back().w = matmul_tn(grad_out, h_last);
    grads.back().b = col_sums(grad_out);
    Matrix dh = matmul(grad_out, p.back().w);
    for (std::size_t ii = L; ii-- > 0;) {
        const std::size_t di = spec.stasy_widths[ii];
        const Matrix& cat = cache.cat_pre[ii];
        const Matrix& lin = cache.lin[ii];
        const Matrix& g = cache.gate[ii];
        const Matrix& h_prev = cache.acts[ii];
        Matrix dcat(cat.rows, cat.cols);
        for (std::size_t k = 0; k < cat.data.size(); ++k)
            dcat.data[k] = dh.data[k] * activation_grad(Activation::ELU, cat.data[k]);
        Matrix dlin(cat.rows, di);
        Matrix dgpre(cat.rows, di);
        Matrix dprev(cat.rows, h_prev.cols);
        for (std::size_t r = 0; r < cat.rows; ++r) {
            const double* dc = dcat.row_ptr(r);
            for (std::size_t j = 0; j < di; ++j) {
                dlin(r, j) = dc[j] * g(r, j);
                dgpre(r, j) = dc[j] * lin(r, j) * g(r, j) * (1.0 - g(r, j));
            }
            for (std::size_t j = 0; j < h_prev.cols; ++j) dprev(r, j) = dc[di + j];
        }
        Dense& gmain = grads[3 * ii];
        gmain.w = matmul_tn(dlin, h_prev);
        gmain.b = col_sums(dlin);
        // gate and time-bias linears see the same input t, so their grads agree
        Dense& ggate = grads[3 * ii + 1];
        Dense& gtbias = grads[3 * ii + 2];
        ggate.b = col_sums(dgpre);
        for (std::size_t j = 0; j < di; ++j) {
            double s = 0.0;
            for (std::size_t r = 0; r < cat.rows; ++r) s += dgpre(r, j) * cache.t[r];
            ggate.w(j, 0) = s;
        }
        gtbias.w = ggate.w;
        gtbias.b = ggate.b;
        dh = matmul(dlin, p[3 * ii].w);
        add_inplace(dh, dprev);
    }
    return grads;
}

inline Matrix tab_forward(const ScoreNetSpec& spec, const ParamSet& p, const Matrix& x,
                          const std::vector<double>& t, Mode mode, Rng* rng, ScoreCache* cache) {
    if (p.size() != 4 + spec.tab_blocks)
        throw std::invalid_argument("tab forward: parameter count mismatch");
    const std::size_t n = x.rows;
    Matrix emb(n, spec.time_dim);
    for (std::size_t r = 0; r < n; ++r) {
        const std::vector<double> e = sinusoidal_time_embedding(t[r], spec.time_dim,
                                                                spec.time_scale);
        std::copy(e.begin(), e.end(), emb.row_ptr(r));
    }
    Matrix u1 = dense_forward(p[0], emb);
    Matrix s1(u1.rows, u1.cols);
    for (std::size_t k = 0; k < u1.data.size(); ++k)
        s1.data[k] = apply_activation(Activation::SiLU, u1.data[k]);
    Matrix u2 = dense_forward(p[1], s1);
    Matrix h = dense_forward(p[2], x);
    add_inplace(h, u2);
    if (cache) {
        cache->acts.push_back(x);
        cache->emb = emb;
        cache->u1 = u1;
        cache->s1 = s1;
        cache->u2 = u2;
        cache->sum_in = h;
    }
    for (std::size_t b = 0; b < spec.tab_blocks; ++b) {
        Matrix z = dense_forward(p[3 + b], h);
        Matrix a(z.rows, z.cols);
        for (std::size_t k = 0; k < z.data.size(); ++k)
            a.data[k] = z.data[k] > 0.0 ? z.data[k] : 0.0;
        Matrix mask;
        if (mode == Mode::Train && spec.tab_dropout > 0.0) {
            if (!rng) throw std::invalid_argument("tab forward: dropout needs an rng");
            mask = Matrix(a.rows, a.cols);
            const double keep = 1.0 - spec.tab_dropout;
            for (std::size_t k = 0; k < mask.data.size(); ++k)
                mask.data[k] = rng->uniform() < keep ? 1.0 / keep : 0.0;
            for (std::size_t k = 0; k < a.data.size(); ++k) a.data[k] *= mask.data[k];
        }
        if (cache) {
            cache->zs.push_back(std::move(z));
            cache->drop_masks.push_back(std::move(mask));
        }
        h = std::move(a);
    }
    Matrix out = dense_forward(p.back(), h);
    if (cache) cache->acts.push_back(std::move(h));
    return out;
}

inline ParamSet tab_backward(const ScoreNetSpec& spec, const ScoreCache& cache, const ParamSet& p,
                             const Matrix& grad_out) {
    ParamSet grads = zeros_like(p);
    const Matrix& h_last = cache.acts.back();
    grads.back().w = matmul_tn(grad_out, h_last);
    grads.back().b = col_sums(grad_out);
    Matrix dh = matmul(grad_out, p.back().w);
    for (std::size_t bb = spec.tab_blocks; bb-- > 0;) {
        const Matrix& z = cache.zs[bb];
        const Matrix& mask = cache.drop_masks[bb];
        Matrix dz(z.rows, z.cols);
        for (std::size_t k = 0; k < z.data.size(); ++k) {
            double gkeep = mask.data.empty() ? 1.0 : mask.data[k];
            dz.data[k] = dh.data[k] * gkeep * (z.data[k] > 0.0 ? 1.0 : 0.0);
        }
        // input of block bb is sum_in for bb==0, else the previous block output
        const Matrix* input = &cache.sum_in;
        Matrix prev_act;
        if (bb > 0) {
            const Matrix& zp = cache.zs[bb - 1];
            const Matrix& mp = cache.drop_masks[bb - 1];
            prev_act = Matrix(zp.rows, zp.cols);
            for (std::size_t k = 0; k < zp.data.size(); ++k) {
                double a = zp.data[k] > 0.0 ? zp.data[k] : 0.0;
                if (!mp.data.empty()) a *= mp.data[k];
                prev_act.data[k] = a;
            }
            input = &prev_act;
        }
        grads[3 + bb].w = matmul_tn(dz, *input);
        grads[3 + bb].b = col_sums(dz);
        dh = matmul(dz, p[3 + bb].w);
    }
    // junction: dh covers both the data projection and the time embedding path
    grads[2].w = matmul_tn(dh, cache.acts.front());
    grads[2].b = col_sums(dh);
    grads[1].w = matmul_tn(dh, cache.s1);
    grads[1].b = col_sums(dh);
    Matrix ds1 = matmul(dh, p[1].w);
    Matrix du1(ds1.rows, ds1.cols);
    for (std::size_t k = 0; k < ds1.data.size(); ++k)
        du1.data[k] = ds1.data[k] * activation_grad(Activation::SiLU, cache.u1.data[k]);
    grads[0].w = matmul_tn(du1, cache.emb);
    grads[0].b = col_sums(du1);
    return grads;
}

}  // namespace detail

inline Matrix score_forward(const ScoreNetSpec& spec, const ParamSet& p, const Matrix& x,
                            const std::vector<double>& t, Mode mode = Mode::Eval,
                            Rng* rng = nullptr, ScoreCache* cache = nullptr) {
    spec.validate();
    if (x.cols != spec.d) throw std::invalid_argument("score_forward: input width mismatch");
    if (t.size() != x.rows) throw std::invalid_argument("score_forward: one t per row required");
    if (cache) {
        *cache = ScoreCache{};
        cache->mode = mode;
        cache->t = t;
    }
    if (spec.variant == ScoreVariant::StasyConcatSquash)
        return detail::stasy_forward(spec, p, x, t, cache);
    return detail::tab_forward(spec, p, x, t, mode, rng, cache);
}

inline Matrix score_forward_at(const ScoreNetSpec& spec, const ParamSet& p, const Matrix& x,
                               double t, Mode mode = Mode::Eval, Rng* rng = nullptr) {
    return score_forward(spec, p, x, std::vector<double>(x.rows, t), mode, rng);
}

inline ParamSet score_backward(const ScoreNetSpec& spec, const ScoreCache& cache,
                               const ParamSet& p, const Matrix& grad_out) {
    if (spec.variant == ScoreVariant::StasyConcatSquash)
        return detail::stasy_backward(spec, cache, p, grad_out);
    return detail::tab_backward(spec, cache, p, grad_out);
}

}  // namespace tabsynth
