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
#include "tabsynth/param_io.hpp"
#include "tabsynth/rng.hpp"
#include "tabsynth/score_net.hpp"
#include "tabsynth/sde.hpp"

namespace tabsynth {

struct DiffusionBundle {
    SdeConfig sde;
    ScoreNetSpec spec;
    ParamSet theta;
    LatentStats stats;
    std::uint64_t train_seed = 0;
};

// One denoising-score-matching draw: per-row time and noise.
struct DsmDraw {
    std::vector<double> t;
    Matrix z;
};

inline DsmDraw draw_dsm(const SdeConfig& cfg, std::size_t n, std::size_t d, Rng& rng) {
    DsmDraw dr;
    dr.t.resize(n);
    for (std::size_t i = 0; i < n; ++i) dr.t[i] = cfg.eps + (cfg.T - cfg.eps) * rng.uniform();
    dr.z = rng.normal_matrix(n, d);
    return dr;
}

namespace detail {

inline Matrix perturb_rows(const SdeConfig& cfg, const Matrix& x0, const DsmDraw& dr) {
    Matrix xt(x0.rows, x0.cols);
    for (std::size_t i = 0; i < x0.rows; ++i) {
        const double mc = mean_coef(cfg, dr.t[i]);
        const double sd = marginal_std(cfg, dr.t[i]);
        for (std::size_t j = 0; j < x0.cols; ++j) xt(i, j) = mc * x0(i, j) + sd * dr.z(i, j);
    }
    return xt;
}

// loss = mean_i lambda(t_i)^2 ||S_i + z_i/sigma_i||^2; grad_s is d(loss)/dS.
inline double dsm_loss_from_score(const SdeConfig& cfg, const Matrix& score, const DsmDraw& dr,
                                  Matrix* grad_s) {
    const std::size_t n = score.rows;
    if (grad_s) *grad_s = Matrix(n, score.cols);
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double sd = marginal_std(cfg, dr.t[i]);
        const double lam = lambda_weight(cfg, dr.t[i]);
        const double w = lam * lam;
        for (std::size_t j = 0; j < score.cols; ++j) {
            const double r = score(i, j) + dr.z(i, j) / sd;
            loss += w * r * r;
            if (grad_s) (*grad_s)(i, j) = 2.0 * w * r / static_cast<double>(n);
        }
    }
    return loss / static_cast<double>(n);
}

}  // namespace detail

// Loss only, with any score function (used by oracle substitutions).
template <typename ScoreFn>
double dsm_loss_value(const SdeConfig& cfg, ScoreFn&& score_fn, const Matrix& x0,
                      const DsmDraw& dr) {
    if (x0.rows == 0) throw std::invalid_argument("dsm_loss_value: empty batch");
    const Matrix xt = detail::perturb_rows(cfg, x0, dr);
    const Matrix s = score_fn(xt, dr.t);
    if (!s.same_shape(x0)) throw std::invalid_argument("dsm_loss_value: score shape mismatch");
    return detail::dsm_loss_from_score(cfg, s, dr, nullptr);
}

struct DsmResult {
    double loss = 0.0;
    ParamSet grads;
};

inline DsmResult dsm_loss_and_grads(const SdeConfig& cfg, const ScoreNetSpec& spec,
                                    const ParamSet& theta, const Matrix& x0, const DsmDraw& dr,
                                    Mode mode = Mode::Train, Rng* dropout_rng = nullptr) {
    if (x0.rows == 0) throw std::invalid_argument("dsm_loss_and_grads: empty batch");
    const Matrix xt = detail::perturb_rows(cfg, x0, dr);
    ScoreCache cache;
    const Matrix s = score_forward(spec, theta, xt, dr.t, mode, dropout_rng, &cache);
    Matrix grad_s;
    DsmResult out;
    out.loss = detail::dsm_loss_from_score(cfg, s, dr, &grad_s);
    out.grads = score_backward(spec, cache, theta, grad_s);
    return out;
}

inline double dsm_loss(const SdeConfig& cfg, const ScoreNetSpec& spec, const ParamSet& theta,
                       const Matrix& x0, Rng& rng) {
    const DsmDraw dr = draw_dsm(cfg, x0.rows, x0.cols, rng);
    const Matrix xt = detail::perturb_rows(cfg, x0, dr);
    const Matrix s = score_forward(spec, theta, xt, dr.t, Mode::Eval, nullptr);
    return detail::dsm_loss_from_score(cfg, s, dr, nullptr);
}

struct DiffusionTrainConfig {
    std::size_t steps = 10000;
    std::size_t batch = 256;
    AdamConfig adam;
};

inline DiffusionBundle train_diffusion(const Matrix& latents, SdeConfig sde, ScoreNetSpec spec,
                                       const DiffusionTrainConfig& cfg, Rng& rng,
                                       std::vector<double>* curve = nullptr) {
    sde.validate();
    if (latents.rows == 0) throw std::invalid_argument("train_diffusion: no latents");
    if (spec.d == 0) spec.d = latents.cols;
    if (spec.d != latents.cols)
        throw std::invalid_argument("train_diffusion: spec width != latent width");
    spec.validate();
    if (cfg.steps == 0 || cfg.batch == 0)
        throw std::invalid_argument("train_diffusion: steps and batch must be positive");
    DiffusionBundle b;
    b.sde = sde;
    b.spec = spec;
    b.train_seed = rng.seed();
    b.theta = init_score_params(spec, rng);
    b.stats.mean.assign(spec.d, 0.0);
    b.stats.std.assign(spec.d, 1.0);
    AdamState state = AdamState::make(b.theta, cfg.adam);
    const std::size_t n = latents.rows;
    std::vector<std::size_t> idx(cfg.batch);
    for (std::size_t step = 0; step < cfg.steps; ++step) {
        for (std::size_t i = 0; i < cfg.batch; ++i)
            idx[i] = static_cast<std::size_t>(rng.below(n));
        const Matrix xb = take_rows(latents, idx);
        const DsmDraw dr = draw_dsm(sde, xb.rows, xb.cols, rng);
        DsmResult res = dsm_loss_and_grads(sde, spec, b.theta, xb, dr, Mode::Train, &rng);
        adam_step(b.theta, res.grads, state);
        if (curve) curve->push_back(res.loss);
    }
    return b;
}

struct SamplerConfig {
    std::size_t steps = 1000;
    std::size_t batch = 8192;
    std::uint64_t seed = 1;
};

// Reverse-time Euler-Maruyama from x(T) ~ N(0,I) down to eps, then
// de-standardization with the stored latent stats.
inline Matrix euler_maruyama_sample(const DiffusionBundle& b, std::size_t n_rows,
                                    const SamplerConfig& sc) {
    if (n_rows == 0) throw std::invalid_argument("euler_maruyama_sample: n_rows == 0");
    if (sc.steps == 0 || sc.batch == 0)
        throw std::invalid_argument("euler_maruyama_sample: steps and batch must be positive");
    b.sde.validate();
    b.spec.validate();
    const std::size_t d = b.spec.d;
    const double dt = (b.sde.T - b.sde.eps) / static_cast<double>(sc.steps);
    Matrix out(n_rows, d);
    Rng base(sc.seed);
    std::size_t chunk = 0;
    for (std::size_t r0 = 0; r0 < n_rows; r0 += sc.batch, ++chunk) {
        const std::size_t rows = std::min(sc.batch, n_rows - r0);
        Rng rng = base.fork(chunk);
        Matrix x = rng.normal_matrix(rows, d);
        for (std::size_t k = 0; k < sc.steps; ++k) {
            const double t = b.sde.T - static_cast<double>(k) * dt;
            const double bt = beta(b.sde, t);
            const double g = std::sqrt(bt);
            const Matrix s = score_forward_at(b.spec, b.theta, x, t);
            const bool last = k + 1 == sc.steps;
            Matrix z;
            if (!last) z = rng.normal_matrix(rows, d);
            const double gs = g * std::sqrt(dt);
            for (std::size_t i = 0; i < rows; ++i)
                for (std::size_t j = 0; j < d; ++j) {
                    const double drift = -0.5 * bt * x(i, j) - bt * s(i, j);
                    x(i, j) -= dt * drift;
                    if (!last) x(i, j) += gs * z(i, j);
                }
        }
        const Matrix xd = invert_standardize(x, b.stats);
        for (std::size_t i = 0; i < rows; ++i)
            std::copy(xd.row_ptr(i), xd.row_ptr(i) + d, out.row_ptr(r0 + i));
    }
    return out;
}

inline void save_diffusion(const std::string& dir, const DiffusionBundle& b) {
    nlohmann::ordered_json j;
    j["format"] = "tabsynth-diffusion";
    j["version"] = 1;
    j["sde"] = {{"beta0", b.sde.beta0},
                {"beta1", b.sde.beta1},
                {"eps", b.sde.eps},
                {"T", b.sde.T},
                {"lambda", lambda_weight_name(b.sde.lambda_mode)},
                {"sigma", sigma_convention_name(b.sde.sigma_mode)}};
    nlohmann::ordered_json sj;
    sj["variant"] = score_variant_name(b.spec.variant);
    sj["d"] = b.spec.d;
    sj["stasy_widths"] = b.spec.stasy_widths;
    sj["tab_proj"] = b.spec.tab_proj;
    sj["tab_blocks"] = b.spec.tab_blocks;
    sj["tab_dropout"] = b.spec.tab_dropout;
    sj["time_dim"] = b.spec.time_dim;
    sj["time_scale"] = b.spec.time_scale;
    j["score_net"] = std::move(sj);
    j["latent_mean"] = b.stats.mean;
    j["latent_std"] = b.stats.std;
    j["train_seed"] = b.train_seed;
    std::ofstream out(dir + "/diffusion.json", std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("save_diffusion: cannot open " + dir);
    out << j.dump(2) << '\n';
    save_params(dir + "/diffusion.params", b.theta);
}

inline DiffusionBundle load_diffusion(const std::string& dir) {
    std::ifstream in(dir + "/diffusion.json", std::ios::binary);
    if (!in) throw std::runtime_error("load_diffusion: cannot open " + dir + "/diffusion.json");
    nlohmann::json j;
    in >> j;
    if (j.value("format", "") != std::string("tabsynth-diffusion") || j.value("version", -1) != 1)
        throw ParamVersionError("load_diffusion: " + dir + ": unrecognized manifest");
    DiffusionBundle b;
    const auto& s = j.at("sde");
    b.sde.beta0 = s.at("beta0").get<double>();
    b.sde.beta1 = s.at("beta1").get<double>();
    b.sde.eps = s.at("eps").get<double>();
    b.sde.T = s.at("T").get<double>();
    b.sde.lambda_mode = lambda_weight_from_name(s.at("lambda").get<std::string>());
    b.sde.sigma_mode = sigma_convention_from_name(s.at("sigma").get<std::string>());
    const auto& sj = j.at("score_net");
    b.spec.variant = score_variant_from_name(sj.at("variant").get<std::string>());
    b.spec.d = sj.at("d").get<std::size_t>();
    b.spec.stasy_widths = sj.at("stasy_widths").get<std::vector<std::size_t>>();
    b.spec.tab_proj = sj.at("tab_proj").get<std::size_t>();
    b.spec.tab_blocks = sj.at("tab_blocks").get<std::size_t>();
    b.spec.tab_dropout = sj.at("tab_dropout").get<double>();
    b.spec.time_dim = sj.at("time_dim").get<std::size_t>();
    b.spec.time_scale = sj.at("time_scale").get<double>();
    b.stats.mean = j.at("latent_mean").get<std::vector<double>>();
    b.stats.std = j.at("latent_std").get<std::vector<double>>();
    b.train_seed = j.at("train_seed").get<std::uint64_t>();
    b.theta = load_params(dir + "/diffusion.params").params;
    return b;
}

}  // namespace tabsynth
