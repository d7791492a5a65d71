#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "tabsynth/matrix.hpp"

namespace tabsynth {

// Marginal std of the VP kernel: the standard form carries a square root,
// the alternative reproduces the formula some implementations print.
enum class SigmaConvention { StandardVp, PaperFormula };

// DSM weighting: SigmaWeight is lambda(t)=sigma(t), the inverse mode is
// lambda(t)=1/sigma(t).
enum class LambdaWeight { SigmaWeight, PaperInverseSigma };

inline const char* sigma_convention_name(SigmaConvention c) {
    return c == SigmaConvention::StandardVp ? "standard_vp" : "paper_formula";
}

inline SigmaConvention sigma_convention_from_name(const std::string& s) {
    if (s == "standard_vp") return SigmaConvention::StandardVp;
    if (s == "paper_formula") return SigmaConvention::PaperFormula;
    throw std::invalid_argument("unknown sigma convention '" + s + "'");
}

inline const char* lambda_weight_name(LambdaWeight w) {
    return w == LambdaWeight::SigmaWeight ? "sigma" : "inverse_sigma";
}

inline LambdaWeight lambda_weight_from_name(const std::string& s) {
    if (s == "sigma") return LambdaWeight::SigmaWeight;
    if (s == "inverse_sigma") return LambdaWeight::PaperInverseSigma;
    throw std::invalid_argument("unknown lambda weight '" + s + "'");
}

// Linear-schedule VP-SDE dx = -1/2 beta(t) x dt + sqrt(beta(t)) dW on [0,T].
struct SdeConfig {
    double beta0 = 0.1;
    double beta1 = 20.0;
    double eps = 1e-5;
    double T = 1.0;
    LambdaWeight lambda_mode = LambdaWeight::SigmaWeight;
    SigmaConvention sigma_mode = SigmaConvention::StandardVp;

    void validate() const {
        if (!(beta0 > 0.0) || !(beta1 > beta0))
            throw std::invalid_argument("SdeConfig: need beta1 > beta0 > 0");
        if (!(eps > 0.0) || !(eps < T)) throw std::invalid_argument("SdeConfig: need 0 < eps < T");
    }
};

namespace detail {
inline void check_time(const SdeConfig& cfg, double t, double lo) {
    if (!(t >= lo && t <= cfg.T))
        throw std::invalid_argument("time t=" + std::to_string(t) + " outside [" +
                                    std::to_string(lo) + "," + std::to_string(cfg.T) + "]");
}
}  // namespace detail

inline double beta(const SdeConfig& cfg, double t) {
    detail::check_time(cfg, t, 0.0);
    return cfg.beta0 + (cfg.beta1 - cfg.beta0) * t;
}

inline double int_beta(const SdeConfig& cfg, double t) {
    detail::check_time(cfg, t, 0.0);
    return cfg.beta0 * t + 0.5 * (cfg.beta1 - cfg.beta0) * t * t;
}

inline double mean_coef(const SdeConfig& cfg, double t) {
    return std::exp(-0.5 * int_beta(cfg, t));
}

inline double marginal_std(const SdeConfig& cfg, double t) {
    const double ib = int_beta(cfg, t);
    if (cfg.sigma_mode == SigmaConvention::StandardVp) return std::sqrt(1.0 - std::exp(-ib));
    return 1.0 - std::exp(-0.5 * ib);
}

inline double diffusion_g(const SdeConfig& cfg, double t) { return std::sqrt(beta(cfg, t)); }

inline double lambda_weight(const SdeConfig& cfg, double t) {
    const double s = marginal_std(cfg, t);
    if (cfg.lambda_mode == LambdaWeight::SigmaWeight) return s;
    if (s == 0.0) throw std::invalid_argument("lambda_weight: sigma(t)=0 under inverse weighting");
    return 1.0 / s;
}

// x(t) = mean_coef(t) x0 + sigma(t) z, the closed-form forward kernel.
inline Matrix perturb(const SdeConfig& cfg, const Matrix& x0, double t, const Matrix& z) {
    detail::check_time(cfg, t, cfg.eps);
    if (!x0.same_shape(z)) throw std::invalid_argument("perturb: shape mismatch");
    const double mc = mean_coef(cfg, t);
    const double sd = marginal_std(cfg, t);
    Matrix out(x0.rows, x0.cols);
    for (std::size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = mc * x0.data[i] + sd * z.data[i];
    return out;
}

}  // namespace tabsynth
