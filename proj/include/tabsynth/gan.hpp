#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tabsynth/adam.hpp"
#include "tabsynth/autoencoder.hpp"
#include "tabsynth/losses.hpp"
#include "tabsynth/param_io.hpp"
#include "tabsynth/rng.hpp"

namespace tabsynth {

struct GanSpec {
    std::size_t d = 0;      // latent width
    std::size_t noise = 0;  // 0 = same as d
    std::size_t width = 128;
    std::size_t blocks = 2;
    double bn_momentum = 0.1;
    double bn_eps = 1e-5;
    double lr_g = 2e-4;
    double lr_d = 2e-4;

    std::size_t noise_width() const { return noise == 0 ? d : noise; }

    void validate() const {
        if (d == 0 || width == 0 || blocks == 0)
            throw std::invalid_argument("GanSpec: zero width or block count");
        if (!(bn_momentum > 0.0 && bn_momentum < 1.0))
            throw std::invalid_argument("GanSpec: bn momentum outside (0,1)");
    }
};

struct BnStats {
    std::vector<double> mean;
    std::vector<double> var;
};

// Generator parameter order: in_proj, then per block [bn1, lin1, bn2, lin2]
// (bn entries store gamma in w's single row and beta in b), then out_proj.
// Discriminator: two hidden dense layers then the logit head.
struct GanModel {
    GanSpec spec;
    ParamSet gen;
    ParamSet disc;
    std::vector<BnStats> bn;  // two per generator block, forward order
    LatentStats stats;
    std::uint64_t train_seed = 0;
};

namespace detail {

struct BnCache {
    std::vector<double> mean;
    std::vector<double> inv_std;
    Matrix xhat;
};

inline Matrix bn_forward(const Dense& gb, const BnStats& running, BnStats* update, const Matrix& x,
                         Mode mode, double momentum, double eps, BnCache* cache) {
    const std::size_t n = x.rows, w = x.cols;
    if (gb.b.size() != w || gb.w.cols != w)
        throw std::invalid_argument("bn_forward: width mismatch");
    std::vector<double> mean(w), var(w);
    if (mode == Mode::Train) {
        if (n < 2) throw std::invalid_argument("bn_forward: train mode needs batch >= 2");
        mean = col_means(x);
        for (std::size_t j = 0; j < w; ++j) var[j] = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < w; ++j) {
                const double d = x(i, j) - mean[j];
                var[j] += d * d;
            }
        for (std::size_t j = 0; j < w; ++j) var[j] /= static_cast<double>(n);
        if (update) {
            // running stats keep the unbiased variance
            const double unbias = static_cast<double>(n) / static_cast<double>(n - 1);
            for (std::size_t j = 0; j < w; ++j) {
                update->mean[j] = (1.0 - momentum) * update->mean[j] + momentum * mean[j];
                update->var[j] = (1.0 - momentum) * update->var[j] + momentum * var[j] * unbias;
            }
        }
    } else {
        mean = running.mean;
        var = running.var;
    }
    Matrix out(n, w);
    std::vector<double> inv_std(w);
    for (std::size_t j = 0; j < w; ++j) inv_std[j] = 1.0 / std::sqrt(var[j] + eps);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < w; ++j) {
            const double xh = (x(i, j) - mean[j]) * inv_std[j];
            out(i, j) = gb.w(0, j) * xh + gb.b[j];
            if (cache) {
                if (cache->xhat.rows != n) cache->xhat = Matrix(n, w);
                cache->xhat(i, j) = xh;
            }
        }
    if (cache) {
        cache->mean = std::move(mean);
        cache->inv_std = std::move(inv_std);
    }
    return out;
}

// Train-mode batchnorm backward; also fills the gamma/beta grads.
inline Matrix bn_backward(const Dense& gb, const BnCache& cache, const Matrix& dout,
                          Dense& grad_gb) {
    const std::size_t n = dout.rows, w = dout.cols;
    grad_gb.w = Matrix(1, w);
    grad_gb.b.assign(w, 0.0);
    std::vector<double> sum_dxhat(w, 0.0), sum_dxhat_xhat(w, 0.0);
    Matrix dxhat(n, w);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < w; ++j) {
            grad_gb.w(0, j) += dout(i, j) * cache.xhat(i, j);
            grad_gb.b[j] += dout(i, j);
            const double dxh = dout(i, j) * gb.w(0, j);
            dxhat(i, j) = dxh;
            sum_dxhat[j] += dxh;
            sum_dxhat_xhat[j] += dxh * cache.xhat(i, j);
        }
    Matrix dx(n, w);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < w; ++j)
            dx(i, j) = cache.inv_std[j] * inv_n *
                       (static_cast<double>(n) * dxhat(i, j) - sum_dxhat[j] -
                        cache.xhat(i, j) * sum_dxhat_xhat[j]);
    return dx;
}

struct GenCache {
    Matrix z;
    Matrix h0;
    struct Block {
        Matrix x_in;
        BnCache bn1;
        Matrix u;   // bn1 output
        Matrix v;   // lin1 pre-activation
        Matrix a;   // relu(v)
        BnCache bn2;
        Matrix w2;  // bn2 output
    };
    std::vector<Block> blocks;
    Matrix h_last;
};

}  // namespace detail

inline ParamSet init_generator(const GanSpec& spec, Rng& rng) {
    spec.validate();
    ParamSet p;
    p.push_back(init_dense(spec.width, spec.noise_width(), rng));
    for (std::size_t b = 0; b < spec.blocks; ++b) {
        Dense bn1{Matrix(1, spec.width), std::vector<double>(spec.width, 0.0)};
        bn1.w.fill(1.0);
        p.push_back(std::move(bn1));
        p.push_back(init_dense(spec.width, spec.width, rng));
        Dense bn2{Matrix(1, spec.width), std::vector<double>(spec.width, 0.0)};
        bn2.w.fill(1.0);
        p.push_back(std::move(bn2));
        p.push_back(init_dense(spec.width, spec.width, rng));
    }
    p.push_back(init_dense(spec.d, spec.width, rng));
    return p;
}

inline ParamSet init_discriminator(const GanSpec& spec, Rng& rng) {
    spec.validate();
    ParamSet p;
    p.push_back(init_dense(spec.width, 2 * spec.d, rng));
    p.push_back(init_dense(spec.width, spec.width, rng));
    p.push_back(init_dense(1, spec.width, rng));
    return p;
}

inline std::vector<BnStats> init_bn_stats(const GanSpec& spec) {
    std::vector<BnStats> s(2 * spec.blocks);
    for (auto& b : s) {
        b.mean.assign(spec.width, 0.0);
        b.var.assign(spec.width, 1.0);
    }
    return s;
}

inline GanModel make_gan(const GanSpec& spec, Rng& rng) {
    GanModel m;
    m.spec = spec;
    m.gen = init_generator(spec, rng);
    m.disc = init_discriminator(spec, rng);
    m.bn = init_bn_stats(spec);
    m.stats.mean.assign(spec.d, 0.0);
    m.stats.std.assign(spec.d, 1.0);
    m.train_seed = rng.seed();
    return m;
}

// Residual block: x + Linear2(BN2(ReLU(Linear1(BN1(x))))). Train mode uses
// batch statistics and, when `running` is given, advances the running stats.
inline Matrix generator_forward(const GanModel& m, const Matrix& z, Mode mode,
                                detail::GenCache* cache = nullptr,
                                std::vector<BnStats>* running = nullptr) {
    const GanSpec& spec = m.spec;
    if (z.cols != spec.noise_width())
        throw std::invalid_argument("generator_forward: noise width mismatch");
    Matrix h = matmul_nt(z, m.gen[0].w);
    add_bias_rows(h, m.gen[0].b);
    if (cache) {
        cache->z = z;
        cache->h0 = h;
        cache->blocks.resize(spec.blocks);
    }
    for (std::size_t b = 0; b < spec.blocks; ++b) {
        const Dense& bn1 = m.gen[1 + 4 * b];
        const Dense& lin1 = m.gen[2 + 4 * b];
        const Dense& bn2 = m.gen[3 + 4 * b];
        const Dense& lin2 = m.gen[4 + 4 * b];
        detail::BnCache c1, c2;
        Matrix u = detail::bn_forward(bn1, m.bn[2 * b], running ? &(*running)[2 * b] : nullptr, h,
                                      mode, spec.bn_momentum, spec.bn_eps, cache ? &c1 : nullptr);
        Matrix v = matmul_nt(u, lin1.w);
        add_bias_rows(v, lin1.b);
        Matrix a(v.rows, v.cols);
        for (std::size_t k = 0; k < v.data.size(); ++k)
            a.data[k] = v.data[k] > 0.0 ? v.data[k] : 0.0;
        Matrix w2 = detail::bn_forward(bn2, m.bn[2 * b + 1],
                                       running ? &(*running)[2 * b + 1] : nullptr, a, mode,
                                       spec.bn_momentum, spec.bn_eps, cache ? &c2 : nullptr);
        Matrix y = matmul_nt(w2, lin2.w);
        add_bias_rows(y, lin2.b);
        if (cache) {
            auto& cb = cache->blocks[b];
            cb.x_in = h;
            cb.bn1 = std::move(c1);
            cb.u = u;
            cb.v = v;
            cb.a = a;
            cb.bn2 = std::move(c2);
            cb.w2 = w2;
        }
        add_inplace(y, h);
        h = std::move(y);
    }
    if (cache) cache->h_last = h;
    Matrix out = matmul_nt(h, m.gen.back().w);
    add_bias_rows(out, m.gen.back().b);
    return out;
}

inline ParamSet generator_backward(const GanModel& m, const detail::GenCache& cache,
                                   const Matrix& grad_out) {
    const GanSpec& spec = m.spec;
    ParamSet grads = zeros_like(m.gen);
    grads.back().w = matmul_tn(grad_out, cache.h_last);
    grads.back().b = col_sums(grad_out);
    Matrix dh = matmul(grad_out, m.gen.back().w);
    for (std::size_t b = spec.blocks; b-- > 0;) {
        const auto& cb = cache.blocks[b];
        const Dense& lin1 = m.gen[2 + 4 * b];
        const Dense& lin2 = m.gen[4 + 4 * b];
        // dh covers both the skip path and the block output
        Dense& g_lin2 = grads[4 + 4 * b];
        g_lin2.w = matmul_tn(dh, cb.w2);
        g_lin2.b = col_sums(dh);
        Matrix dw2 = matmul(dh, lin2.w);
        Matrix da = detail::bn_backward(m.gen[3 + 4 * b], cb.bn2, dw2, grads[3 + 4 * b]);
        for (std::size_t k = 0; k < da.data.size(); ++k)
            if (cb.v.data[k] <= 0.0) da.data[k] = 0.0;
        Dense& g_lin1 = grads[2 + 4 * b];
        g_lin1.w = matmul_tn(da, cb.u);
        g_lin1.b = col_sums(da);
        Matrix du = matmul(da, lin1.w);
        Matrix dx = detail::bn_backward(m.gen[1 + 4 * b], cb.bn1, du, grads[1 + 4 * b]);
        add_inplace(dh, dx);
    }
    grads[0].w = matmul_tn(dh, cache.z);
    grads[0].b = col_sums(dh);
    return grads;
}

namespace detail {

struct DiscCache {
    Matrix aug;  // [x | batch mean]
    Matrix z1, a1, z2, a2;
};

}  // namespace detail

// Each row is scored together with the minibatch mean row.
inline Matrix discriminator_forward(const GanModel& m, const Matrix& x,
                                    detail::DiscCache* cache = nullptr) {
    if (x.rows == 0) throw std::invalid_argument("discriminator_forward: empty batch");
    if (x.cols != m.spec.d) throw std::invalid_argument("discriminator_forward: width mismatch");
    const std::vector<double> mean = col_means(x);
    Matrix aug(x.rows, 2 * x.cols);
    for (std::size_t i = 0; i < x.rows; ++i) {
        std::copy(x.row_ptr(i), x.row_ptr(i) + x.cols, aug.row_ptr(i));
        std::copy(mean.begin(), mean.end(), aug.row_ptr(i) + x.cols);
    }
    Matrix z1 = matmul_nt(aug, m.disc[0].w);
    add_bias_rows(z1, m.disc[0].b);
    Matrix a1(z1.rows, z1.cols);
    for (std::size_t k = 0; k < z1.data.size(); ++k)
        a1.data[k] = z1.data[k] > 0.0 ? z1.data[k] : 0.0;
    Matrix z2 = matmul_nt(a1, m.disc[1].w);
    add_bias_rows(z2, m.disc[1].b);
    Matrix a2(z2.rows, z2.cols);
    for (std::size_t k = 0; k < z2.data.size(); ++k)
        a2.data[k] = z2.data[k] > 0.0 ? z2.data[k] : 0.0;
    Matrix logit = matmul_nt(a2, m.disc[2].w);
    add_bias_rows(logit, m.disc[2].b);
    if (cache) {
        cache->aug = std::move(aug);
        cache->z1 = std::move(z1);
        cache->a1 = std::move(a1);
        cache->z2 = std::move(z2);
        cache->a2 = std::move(a2);
    }
    return logit;
}

struct DiscBackward {
    ParamSet grads;
    Matrix grad_input;
};

inline DiscBackward discriminator_backward(const GanModel& m, const detail::DiscCache& cache,
                                           const Matrix& grad_logit) {
    DiscBackward out;
    out.grads = zeros_like(m.disc);
    out.grads[2].w = matmul_tn(grad_logit, cache.a2);
    out.grads[2].b = col_sums(grad_logit);
    Matrix da2 = matmul(grad_logit, m.disc[2].w);
    for (std::size_t k = 0; k < da2.data.size(); ++k)
        if (cache.z2.data[k] <= 0.0) da2.data[k] = 0.0;
    out.grads[1].w = matmul_tn(da2, cache.a1);
    out.grads[1].b = col_sums(da2);
    Matrix da1 = matmul(da2, m.disc[1].w);
    for (std::size_t k = 0; k < da1.data.size(); ++k)
        if (cache.z1.data[k] <= 0.0) da1.data[k] = 0.0;
    out.grads[0].w = matmul_tn(da1, cache.aug);
    out.grads[0].b = col_sums(da1);
    Matrix daug = matmul(da1, m.disc[0].w);
    const std::size_t d = m.spec.d, n = daug.rows;
    out.grad_input = Matrix(n, d);
    std::vector<double> mean_grad(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) mean_grad[j] += daug(i, d + j);
    for (std::size_t j = 0; j < d; ++j) mean_grad[j] /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) out.grad_input(i, j) = daug(i, j) + mean_grad[j];
    return out;
}

struct GanStepLosses {
    double d_loss = 0.0;
    double g_loss = 0.0;
};

struct GanTrainState {
    AdamState gen;
    AdamState disc;

    static GanTrainState make(const GanModel& m) {
        AdamConfig cg, cd;
        cg.lr = m.spec.lr_g;
        cd.lr = m.spec.lr_d;
        return {AdamState::make(m.gen, cg), AdamState::make(m.disc, cd)};
    }
};

// One discriminator update on real+fake, then one generator update.
inline GanStepLosses gan_train_step(GanModel& m, GanTrainState& st, const Matrix& real, Rng& rng) {
    if (real.rows < 2) throw std::invalid_argument("gan_train_step: batch must be >= 2");
    if (real.cols != m.spec.d) throw std::invalid_argument("gan_train_step: width mismatch");
    const std::size_t n = real.rows;
    GanStepLosses losses;

    {
        const Matrix z = rng.normal_matrix(n, m.spec.noise_width());
        const Matrix fake = generator_forward(m, z, Mode::Train, nullptr, &m.bn);
        detail::DiscCache cr, cf;
        const Matrix logit_r = discriminator_forward(m, real, &cr);
        const Matrix logit_f = discriminator_forward(m, fake, &cf);
        Matrix ones(n, 1), zeros(n, 1);
        ones.fill(1.0);
        const LossResult lr = bce_with_logits(logit_r, ones);
        const LossResult lf = bce_with_logits(logit_f, zeros);
        losses.d_loss = lr.value + lf.value;
        DiscBackward br = discriminator_backward(m, cr, lr.grad);
        DiscBackward bf = discriminator_backward(m, cf, lf.grad);
        accumulate(br.grads, bf.grads);
        adam_step(m.disc, br.grads, st.disc);
    }

    {
        const Matrix z = rng.normal_matrix(n, m.spec.noise_width());
        detail::GenCache gc;
        const Matrix fake = generator_forward(m, z, Mode::Train, &gc, &m.bn);
        detail::DiscCache cf;
        const Matrix logit = discriminator_forward(m, fake, &cf);
        Matrix ones(n, 1);
        ones.fill(1.0);
        const LossResult lg = bce_with_logits(logit, ones);
        losses.g_loss = lg.value;
        DiscBackward bd = discriminator_backward(m, cf, lg.grad);
        ParamSet ggrads = generator_backward(m, gc, bd.grad_input);
        adam_step(m.gen, ggrads, st.gen);
    }
    return losses;
}

struct GanTrainConfig {
    std::size_t steps = 5000;
    std::size_t batch = 256;
};

inline GanModel train_gan(const Matrix& latents, GanSpec spec, const GanTrainConfig& cfg,
                          Rng& rng, std::vector<GanStepLosses>* curve = nullptr) {
    if (latents.rows < 2) throw std::invalid_argument("train_gan: need at least 2 rows");
    if (spec.d == 0) spec.d = latents.cols;
    if (spec.d != latents.cols) throw std::invalid_argument("train_gan: spec width mismatch");
    spec.validate();
    GanModel m = make_gan(spec, rng);
    GanTrainState st = GanTrainState::make(m);
    const std::size_t n = latents.rows;
    const std::size_t batch = std::max<std::size_t>(2, std::min(cfg.batch, n));
    std::vector<std::size_t> idx(batch);
    for (std::size_t step = 0; step < cfg.steps; ++step) {
        for (std::size_t i = 0; i < batch; ++i) idx[i] = static_cast<std::size_t>(rng.below(n));
        const Matrix xb = take_rows(latents, idx);
        const GanStepLosses l = gan_train_step(m, st, xb, rng);
        if (curve) curve->push_back(l);
    }
    return m;
}

inline Matrix gan_sample(const GanModel& model, std::size_t n_rows, std::uint64_t seed) {
    if (n_rows == 0) throw std::invalid_argument("gan_sample: n_rows == 0");
    Rng rng(seed);
    const Matrix z = rng.normal_matrix(n_rows, model.spec.noise_width());
    const Matrix lat = generator_forward(model, z, Mode::Eval);
    return invert_standardize(lat, model.stats);
}

inline void save_gan(const std::string& dir, const GanModel& m) {
    nlohmann::ordered_json j;
    j["format"] = "tabsynth-gan";
    j["version"] = 1;
    j["d"] = m.spec.d;
    j["noise"] = m.spec.noise_width();
    j["width"] = m.spec.width;
    j["blocks"] = m.spec.blocks;
    j["bn_momentum"] = m.spec.bn_momentum;
    j["bn_eps"] = m.spec.bn_eps;
    j["lr_g"] = m.spec.lr_g;
    j["lr_d"] = m.spec.lr_d;
    j["bn_running"] = nlohmann::ordered_json::array();
    for (const auto& b : m.bn)
        j["bn_running"].push_back({{"mean", b.mean}, {"var", b.var}});
    j["latent_mean"] = m.stats.mean;
    j["latent_std"] = m.stats.std;
    j["train_seed"] = m.train_seed;
    std::ofstream out(dir + "/gan.json", std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("save_gan: cannot open " + dir);
    out << j.dump(2) << '\n';
    ParamSet both = m.gen;
    for (const auto& d : m.disc) both.push_back(d);
    save_params(dir + "/gan.params", both, {{"gen_tensors", std::to_string(m.gen.size())}});
}

inline GanModel load_gan(const std::string& dir) {
    std::ifstream in(dir + "/gan.json", std::ios::binary);
    if (!in) throw std::runtime_error("load_gan: cannot open " + dir + "/gan.json");
    nlohmann::json j;
    in >> j;
    if (j.value("format", "") != std::string("tabsynth-gan") || j.value("version", -1) != 1)
        throw ParamVersionError("load_gan: " + dir + ": unrecognized manifest");
    GanModel m;
    m.spec.d = j.at("d").get<std::size_t>();
    m.spec.noise = j.at("noise").get<std::size_t>();
    m.spec.width = j.at("width").get<std::size_t>();
    m.spec.blocks = j.at("blocks").get<std::size_t>();
    m.spec.bn_momentum = j.at("bn_momentum").get<double>();
    m.spec.bn_eps = j.at("bn_eps").get<double>();
    m.spec.lr_g = j.at("lr_g").get<double>();
    m.spec.lr_d = j.at("lr_d").get<double>();
    for (const auto& b : j.at("bn_running")) {
        BnStats s;
        s.mean = b.at("mean").get<std::vector<double>>();
        s.var = b.at("var").get<std::vector<double>>();
        m.bn.push_back(std::move(s));
    }
    m.stats.mean = j.at("latent_mean").get<std::vector<double>>();
    m.stats.std = j.at("latent_std").get<std::vector<double>>();
    m.train_seed = j.at("train_seed").get<std::uint64_t>();
    ParamFile pf = load_params(dir + "/gan.params");
    std::size_t gen_count = 0;
    for (const auto& [k, v] : pf.meta)
        if (k == "gen_tensors") gen_count = std::stoul(v);
    if (gen_count == 0 || gen_count > pf.params.size())
        throw ParamFormatError("load_gan: bad gen_tensors meta");
    m.gen.assign(pf.params.begin(), pf.params.begin() + static_cast<std::ptrdiff_t>(gen_count));
    m.disc.assign(pf.params.begin() + static_cast<std::ptrdiff_t>(gen_count), pf.params.end());
    return m;
}

}  // namespace tabsynth
