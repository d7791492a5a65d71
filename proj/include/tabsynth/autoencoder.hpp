#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tabsynth/adam.hpp"
#include "tabsynth/losses.hpp"
#include "tabsynth/matrix.hpp"
#include "tabsynth/mlp.hpp"
#include "tabsynth/param_io.hpp"
#include "tabsynth/rng.hpp"
#include "tabsynth/schema.hpp"

namespace tabsynth {

enum class AeLoss { Heterogeneous, MedMse };

inline const char* ae_loss_name(AeLoss l) {
    return l == AeLoss::Heterogeneous ? "heterogeneous" : "med_mse";
}

inline AeLoss ae_loss_from_name(const std::string& s) {
    if (s == "heterogeneous") return AeLoss::Heterogeneous;
    if (s == "med_mse") return AeLoss::MedMse;
    throw std::invalid_argument("unknown autoencoder loss '" + s + "'");
}

struct AutoencoderSpec {
    std::size_t width = 0;  // 0 = take from the processed table
    std::size_t hidden = 250;
    std::size_t enc_blocks = 2;
    std::size_t dec_blocks = 2;
    AeLoss loss = AeLoss::Heterogeneous;

    void validate() const {
        if (hidden == 0) throw std::invalid_argument("AutoencoderSpec: hidden width 0");
        if (enc_blocks == 0 || dec_blocks == 0)
            throw std::invalid_argument("AutoencoderSpec: block count 0");
    }
};

// Widths of the three decoder head blocks. The categorical head is one
// logit group per variable (Heterogeneous) or one scalar (MedMse).
struct AeLayout {
    std::size_t num = 0;
    std::size_t bin = 0;
    std::vector<std::size_t> cat_cards;

    static AeLayout from_block(const BlockLayout& l) {
        AeLayout a;
        a.num = l.num_width();
        a.bin = l.bin_width();
        a.cat_cards = l.cat_cards;
        return a;
    }

    std::size_t in_width() const { return num + bin + cat_cards.size(); }

    std::size_t out_width(AeLoss loss) const {
        if (loss == AeLoss::MedMse) return in_width();
        std::size_t w = num + bin;
        for (std::size_t k : cat_cards) w += k;
        return w;
    }
};

struct AutoencoderModel {
    AutoencoderSpec spec;
    AeLayout layout;
    std::vector<double> num_lo;
    std::vector<double> num_hi;
    ParamSet enc;
    ParamSet dec;

    MlpSpec enc_spec() const {
        MlpSpec s;
        s.in_width = spec.width;
        for (std::size_t i = 0; i < spec.enc_blocks; ++i)
            s.layers.push_back({spec.hidden, Activation::ReLU, 0.0});
        s.layers.push_back({spec.width, Activation::Identity, 0.0});
        return s;
    }

    MlpSpec dec_spec() const {
        MlpSpec s;
        s.in_width = spec.width;
        for (std::size_t i = 0; i < spec.dec_blocks; ++i)
            s.layers.push_back({spec.hidden, Activation::ReLU, 0.0});
        s.layers.push_back({layout.out_width(spec.loss), Activation::Identity, 0.0});
        return s;
    }
};

inline AutoencoderModel make_autoencoder(const ProcessedTable& pt, AutoencoderSpec spec,
                                         Rng& rng) {
    spec.validate();
    if (spec.width == 0) spec.width = pt.layout.width();
    if (spec.width != pt.layout.width())
        throw std::invalid_argument("make_autoencoder: spec width " + std::to_string(spec.width) +
                                    " != processed width " + std::to_string(pt.layout.width()));
    AutoencoderModel m;
    m.spec = spec;
    m.layout = AeLayout::from_block(pt.layout);
    m.num_lo = pt.num_lo;
    m.num_hi = pt.num_hi;
    m.enc = init_mlp_params(m.enc_spec(), rng);
    m.dec = init_mlp_params(m.dec_spec(), rng);
    return m;
}

inline Matrix encode(const AutoencoderModel& m, const Matrix& x) {
    return mlp_forward(m.enc_spec(), m.enc, x, Mode::Eval, nullptr);
}

namespace detail {

// Clamps the numerical head in place; mask gets 1 where the raw value was
// inside its bounds (subgradient of the clamp).
inline void clamp_num_block(const AutoencoderModel& m, Matrix& raw, Matrix* mask = nullptr) {
    for (std::size_t i = 0; i < raw.rows; ++i)
        for (std::size_t j = 0; j < m.layout.num; ++j) {
            const double lo = m.num_lo[j], hi = m.num_hi[j];
            double& v = raw(i, j);
            const bool inside = v >= lo && v <= hi;
            if (mask) (*mask)(i, j) = inside ? 1.0 : 0.0;
            if (!inside) v = std::clamp(v, lo, hi);
        }
}

}  // namespace detail

// Raw decoder output with the numerical block clamped; binary and
// categorical entries stay logits (Heterogeneous) or scalars (MedMse).
inline Matrix decode(const AutoencoderModel& m, const Matrix& z) {
    Matrix raw = mlp_forward(m.dec_spec(), m.dec, z, Mode::Eval, nullptr);
    detail::clamp_num_block(m, raw);
    return raw;
}

// Applies the decode rules: sigmoid threshold for binary, argmax (or code
// rounding under MedMse) for categorical.
inline DecodedTable decode_table(const AutoencoderModel& m, const Matrix& z) {
    const Matrix raw = decode(m, z);
    const std::size_t n = raw.rows;
    const AeLayout& L = m.layout;
    DecodedTable out;
    out.nums = slice_cols(raw, 0, L.num);
    out.bins = Matrix(n, L.bin);
    out.cats = Matrix(n, L.cat_cards.size());
    const bool med = m.spec.loss == AeLoss::MedMse;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < L.bin; ++j) {
            const double v = raw(i, L.num + j);
            out.bins(i, j) = med ? (v >= 0.5 ? 1.0 : 0.0) : (sigmoid(v) >= 0.5 ? 1.0 : 0.0);
        }
        std::size_t off = L.num + L.bin;
        for (std::size_t c = 0; c < L.cat_cards.size(); ++c) {
            const std::size_t K = L.cat_cards[c];
            if (med) {
                const double denom = static_cast<double>(K - 1);
                long long code = denom == 0.0 ? 0 : std::llround(raw(i, off) * denom);
                code = std::clamp(code, 0LL, static_cast<long long>(K - 1));
                out.cats(i, c) = static_cast<double>(code);
                off += 1;
            } else {
                std::size_t best = 0;
                for (std::size_t k = 1; k < K; ++k)
                    if (raw(i, off + k) > raw(i, off + best)) best = k;
                out.cats(i, c) = static_cast<double>(best);
                off += K;
            }
        }
    }
    return out;
}

struct AeLossTerms {
    double total = 0.0;
    double num = 0.0;
    double bin = 0.0;
    double cat = 0.0;
};

struct AeGrads {
    AeLossTerms terms;
    ParamSet enc_grads;
    ParamSet dec_grads;
};

namespace detail {

// Loss over one batch plus the gradient wrt the raw decoder output.
inline AeLossTerms ae_output_loss(const AutoencoderModel& m, const Matrix& x, const Matrix& raw,
                                  const Matrix& clamp_mask, Matrix& grad_raw) {
    const AeLayout& L = m.layout;
    const std::size_t n = x.rows;
    grad_raw = Matrix(n, raw.cols);
    AeLossTerms terms;

    if (L.num) {
        Matrix clamped_num = slice_cols(raw, 0, L.num);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < L.num; ++j)
                clamped_num(i, j) = std::clamp(clamped_num(i, j), m.num_lo[j], m.num_hi[j]);
        const LossResult r = mse(clamped_num, slice_cols(x, 0, L.num));
        terms.num = r.value;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < L.num; ++j)
                grad_raw(i, j) = r.grad(i, j) * clamp_mask(i, j);
    }

    const std::size_t ncat = L.cat_cards.size();
    if (m.spec.loss == AeLoss::MedMse) {
        if (L.bin) {
            const LossResult r =
                mse(slice_cols(raw, L.num, L.bin), slice_cols(x, L.num, L.bin));
            terms.bin = r.value;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < L.bin; ++j) grad_raw(i, L.num + j) = r.grad(i, j);
        }
        if (ncat) {
            const LossResult r = mse(slice_cols(raw, L.num + L.bin, ncat),
                                     slice_cols(x, L.num + L.bin, ncat));
            terms.cat = r.value;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < ncat; ++j)
                    grad_raw(i, L.num + L.bin + j) = r.grad(i, j);
        }
    } else {
        if (L.bin) {
            const LossResult r =
                bce_with_logits(slice_cols(raw, L.num, L.bin), slice_cols(x, L.num, L.bin));
            terms.bin = r.value;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < L.bin; ++j) grad_raw(i, L.num + j) = r.grad(i, j);
        }
        std::size_t off = L.num + L.bin;
        for (std::size_t c = 0; c < ncat; ++c) {
            const std::size_t K = L.cat_cards[c];
            const double denom = static_cast<double>(K - 1);
            std::vector<int> classes(n);
            for (std::size_t i = 0; i < n; ++i)
                classes[i] = static_cast<int>(std::llround(x(i, L.num + L.bin + c) * denom));
            const LossResult r = ce_with_logits(slice_cols(raw, off, K), classes);
            terms.cat += r.value;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t k = 0; k < K; ++k) grad_raw(i, off + k) = r.grad(i, k);
            off += K;
        }
    }
    terms.total = terms.num + terms.bin + terms.cat;
    return terms;
}

}  // namespace detail

inline AeGrads ae_loss_and_grads(const AutoencoderModel& m, const Matrix& x) {
    if (x.cols != m.spec.width)
        throw std::invalid_argument("ae_loss_and_grads: input width mismatch");
    MlpCache enc_cache, dec_cache;
    const Matrix lat = mlp_forward(m.enc_spec(), m.enc, x, Mode::Train, nullptr, &enc_cache);
    Matrix raw = mlp_forward(m.dec_spec(), m.dec, lat, Mode::Train, nullptr, &dec_cache);
    Matrix clamp_mask(raw.rows, m.layout.num ? m.layout.num : 1);
    {
        Matrix probe = raw;
        detail::clamp_num_block(m, probe, &clamp_mask);
    }
    Matrix grad_raw;
    AeGrads out;
    out.terms = detail::ae_output_loss(m, x, raw, clamp_mask, grad_raw);
    MlpBackwardResult dec_back = mlp_backward(dec_cache, m.dec, grad_raw);
    MlpBackwardResult enc_back = mlp_backward(enc_cache, m.enc, dec_back.grad_input);
    out.dec_grads = std::move(dec_back.param_grads);
    out.enc_grads = std::move(enc_back.param_grads);
    return out;
}

inline double ae_loss(const AutoencoderModel& m, const Matrix& x) {
    return ae_loss_and_grads(m, x).terms.total;
}

struct AeTrainConfig {
    std::size_t epochs = 1000;
    std::size_t batch = 256;
    AdamConfig adam;
};

inline AutoencoderModel train_autoencoder(const ProcessedTable& pt, AutoencoderSpec spec,
                                          const AeTrainConfig& cfg, Rng& rng,
                                          std::vector<double>* curve = nullptr) {
    if (pt.x.rows == 0) throw std::invalid_argument("train_autoencoder: empty input");
    if (cfg.batch == 0 || cfg.epochs == 0)
        throw std::invalid_argument("train_autoencoder: batch and epochs must be positive");
    AutoencoderModel m = make_autoencoder(pt, spec, rng);
    AdamState enc_state = AdamState::make(m.enc, cfg.adam);
    AdamState dec_state = AdamState::make(m.dec, cfg.adam);
    const std::size_t n = pt.x.rows;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const std::vector<std::size_t> perm = rng.permutation(n);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < n; start += cfg.batch) {
            const std::size_t stop = std::min(n, start + cfg.batch);
            const std::vector<std::size_t> idx(perm.begin() + start, perm.begin() + stop);
            const Matrix xb = take_rows(pt.x, idx);
            AeGrads g = ae_loss_and_grads(m, xb);
            epoch_loss += g.terms.total * static_cast<double>(idx.size());
            adam_step(m.enc, g.enc_grads, enc_state);
            adam_step(m.dec, g.dec_grads, dec_state);
        }
        if (curve) curve->push_back(epoch_loss / static_cast<double>(n));
    }
    return m;
}

struct LatentStats {
    std::vector<double> mean;
    std::vector<double> std;
};

// Per-dimension population standardization; near-constant dimensions keep
// std 1 so the transform stays invertible.
inline LatentStats fit_latent_stats(const Matrix& z) {
    if (z.rows < 2) throw std::invalid_argument("fit_latent_stats: need at least 2 rows");
    LatentStats s;
    s.mean = col_means(z);
    s.std.assign(z.cols, 0.0);
    for (std::size_t i = 0; i < z.rows; ++i)
        for (std::size_t j = 0; j < z.cols; ++j) {
            const double d = z(i, j) - s.mean[j];
            s.std[j] += d * d;
        }
    for (std::size_t j = 0; j < z.cols; ++j) {
        s.std[j] = std::sqrt(s.std[j] / static_cast<double>(z.rows));
        if (s.std[j] < 1e-12) s.std[j] = 1.0;
    }
    return s;
}

inline Matrix apply_standardize(const Matrix& z, const LatentStats& s) {
    if (z.cols != s.mean.size()) throw std::invalid_argument("apply_standardize: width mismatch");
    Matrix out = z;
    for (std::size_t i = 0; i < out.rows; ++i)
        for (std::size_t j = 0; j < out.cols; ++j)
            out(i, j) = (out(i, j) - s.mean[j]) / s.std[j];
    return out;
}

inline Matrix invert_standardize(const Matrix& z, const LatentStats& s) {
    if (z.cols != s.mean.size()) throw std::invalid_argument("invert_standardize: width mismatch");
    Matrix out = z;
    for (std::size_t i = 0; i < out.rows; ++i)
        for (std::size_t j = 0; j < out.cols; ++j) out(i, j) = out(i, j) * s.std[j] + s.mean[j];
    return out;
}

inline void save_autoencoder(const std::string& dir, const AutoencoderModel& m) {
    nlohmann::ordered_json j;
    j["format"] = "tabsynth-autoencoder";
    j["version"] = 1;
    j["width"] = m.spec.width;
    j["hidden"] = m.spec.hidden;
    j["enc_blocks"] = m.spec.enc_blocks;
    j["dec_blocks"] = m.spec.dec_blocks;
    j["loss"] = ae_loss_name(m.spec.loss);
    j["layout"] = {{"num", m.layout.num}, {"bin", m.layout.bin}, {"cat_cards", m.layout.cat_cards}};
    j["num_lo"] = m.num_lo;
    j["num_hi"] = m.num_hi;
    std::ofstream out(dir + "/autoencoder.json", std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("save_autoencoder: cannot open " + dir);
    out << j.dump(2) << '\n';
    ParamSet both = m.enc;
    for (const auto& d : m.dec) both.push_back(d);
    save_params(dir + "/autoencoder.params", both,
                {{"enc_tensors", std::to_string(m.enc.size())}});
}

inline AutoencoderModel load_autoencoder(const std::string& dir) {
    std::ifstream in(dir + "/autoencoder.json", std::ios::binary);
    if (!in) throw std::runtime_error("load_autoencoder: cannot open " + dir + "/autoencoder.json");
    nlohmann::json j;
    in >> j;
    if (j.value("format", "") != std::string("tabsynth-autoencoder") || j.value("version", -1) != 1)
        throw ParamVersionError("load_autoencoder: " + dir + ": unrecognized manifest");
    AutoencoderModel m;
    m.spec.width = j.at("width").get<std::size_t>();
    m.spec.hidden = j.at("hidden").get<std::size_t>();
    m.spec.enc_blocks = j.at("enc_blocks").get<std::size_t>();
    m.spec.dec_blocks = j.at("dec_blocks").get<std::size_t>();
    m.spec.loss = ae_loss_from_name(j.at("loss").get<std::string>());
    m.layout.num = j.at("layout").at("num").get<std::size_t>();
    m.layout.bin = j.at("layout").at("bin").get<std::size_t>();
    m.layout.cat_cards = j.at("layout").at("cat_cards").get<std::vector<std::size_t>>();
    m.num_lo = j.at("num_lo").get<std::vector<double>>();
    m.num_hi = j.at("num_hi").get<std::vector<double>>();
    ParamFile pf = load_params(dir + "/autoencoder.params");
    std::size_t enc_count = 0;
    for (const auto& [k, v] : pf.meta)
        if (k == "enc_tensors") enc_count = std::stoul(v);
    if (enc_count == 0 || enc_count > pf.params.size())
        throw ParamFormatError("load_autoencoder: bad enc_tensors meta");
    m.enc.assign(pf.params.begin(), pf.params.begin() + static_cast<std::ptrdiff_t>(enc_count));
    m.dec.assign(pf.params.begin() + static_cast<std::ptrdiff_t>(enc_count), pf.params.end());
    return m;
}

}  // namespace tabsynth
