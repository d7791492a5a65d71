#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>

#include <tabsynth/diffusion.hpp>
#include <tabsynth/gradcheck.hpp>

using namespace tabsynth;
namespace fs = std::filesystem;

TEST_CASE("dsm draw stays inside the time range") {
    SdeConfig cfg;
    Rng rng(3);
    DsmDraw dr = draw_dsm(cfg, 500, 4, rng);
    REQUIRE(dr.t.size() == 500);
    REQUIRE(dr.z.rows == 500);
    REQUIRE(dr.z.cols == 4);
    for (double t : dr.t) {
        REQUIRE(t >= cfg.eps);
        REQUIRE(t <= cfg.T);
    }
    Rng rng2(3);
    DsmDraw dr2 = draw_dsm(cfg, 500, 4, rng2);
    CHECK(dr.t == dr2.t);
    CHECK(max_abs_diff(dr.z, dr2.z) == 0.0);
}

TEST_CASE("analytic conditional score zeroes the dsm loss") {
    SdeConfig cfg;
    Rng rng(7);
    Matrix x0 = rng.normal_matrix(64, 3);
    DsmDraw dr = draw_dsm(cfg, 64, 3, rng);
    auto oracle = [&](const Matrix& xt, const std::vector<double>& tv) {
        Matrix s(xt.rows, xt.cols);
        for (std::size_t i = 0; i < xt.rows; ++i) {
            const double mc = mean_coef(cfg, tv[i]);
            const double var = marginal_std(cfg, tv[i]) * marginal_std(cfg, tv[i]);
            for (std::size_t j = 0; j < xt.cols; ++j)
                s(i, j) = -(xt(i, j) - mc * x0(i, j)) / var;
        }
        return s;
    };
    CHECK(dsm_loss_value(cfg, oracle, x0, dr) < 1e-10);
}

TEST_CASE("zero score gives loss near the data dimension under sigma weighting") {
    SdeConfig cfg;
    const std::size_t n = 20000, d = 3;
    Rng rng(11);
    Matrix x0 = rng.normal_matrix(n, d);
    DsmDraw dr = draw_dsm(cfg, n, d, rng);
    auto zero = [](const Matrix& xt, const std::vector<double>&) {
        return Matrix(xt.rows, xt.cols);
    };
    const double loss = dsm_loss_value(cfg, zero, x0, dr);
    // lambda = sigma cancels the 1/sigma^2, leaving E||z||^2 = d
    CHECK(loss == Catch::Approx(static_cast<double>(d)).epsilon(0.05));
}

TEST_CASE("dsm gradients match finite differences for both score nets") {
    SdeConfig cfg;
    for (ScoreVariant v : {ScoreVariant::StasyConcatSquash, ScoreVariant::TabTimeMlp}) {
        for (LambdaWeight lw : {LambdaWeight::SigmaWeight, LambdaWeight::PaperInverseSigma}) {
            SdeConfig c = cfg;
            c.lambda_mode = lw;
            ScoreNetSpec spec;
            spec.variant = v;
            spec.d = 3;
            spec.stasy_widths = {4, 3};
            spec.tab_proj = 5;
            spec.tab_blocks = 2;
            spec.time_dim = 6;
            Rng rng(29);
            ParamSet theta = init_score_params(spec, rng);
            Matrix x0 = rng.normal_matrix(6, 3);
            DsmDraw dr = draw_dsm(c, 6, 3, rng);

            DsmResult res = dsm_loss_and_grads(c, spec, theta, x0, dr);
            auto loss_fn = [&](const ParamSet& p) {
                auto fn = [&](const Matrix& xt, const std::vector<double>& tv) {
                    return score_forward(spec, p, xt, tv);
                };
                return dsm_loss_value(c, fn, x0, dr);
            };
            auto gc = grad_check(theta, loss_fn, res.grads);
            INFO("variant " << score_variant_name(v) << " lambda " << lambda_weight_name(lw));
            CHECK(gc.max_rel_err < 1e-4);
        }
    }
}

TEST_CASE("single euler step reproduces the closed-form update") {
    SdeConfig cfg;
    ScoreNetSpec spec;
    spec.d = 2;
    spec.tab_proj = 4;
    spec.tab_blocks = 1;
    spec.time_dim = 4;
    Rng rng(5);
    DiffusionBundle b;
    b.sde = cfg;
    b.spec = spec;
    b.theta = init_score_params(spec, rng);
    for (auto& dn : b.theta) {
        dn.w.fill(0.0);
        std::fill(dn.b.begin(), dn.b.end(), 0.0);
    }
    b.stats.mean = {0.0, 0.0};
    b.stats.std = {1.0, 1.0};

    SamplerConfig sc;
    sc.steps = 1;
    sc.batch = 8192;
    sc.seed = 99;
    Matrix out = euler_maruyama_sample(b, 5, sc);

    // with a zero score the single reverse step is x <- x (1 + 10 dt)
    const double dt = (cfg.T - cfg.eps) / 1.0;
    Rng chunk0 = Rng(99).fork(0);
    Matrix z0 = chunk0.normal_matrix(5, 2);
    for (std::size_t k = 0; k < z0.data.size(); ++k)
        CHECK(out.data[k] == Catch::Approx(z0.data[k] * (1.0 + 10.0 * dt)).margin(1e-12));
}

TEST_CASE("sampling is deterministic and chunking is stable") {
    ScoreNetSpec spec;
    spec.d = 2;
    spec.tab_proj = 8;
    spec.tab_blocks = 2;
    spec.time_dim = 8;
    Rng rng(17);
    DiffusionBundle b;
    b.spec = spec;
    b.theta = init_score_params(spec, rng);
    b.stats.mean = {0.0, 0.0};
    b.stats.std = {1.0, 1.0};

    SamplerConfig sc;
    sc.steps = 20;
    sc.batch = 3;
    sc.seed = 4;
    Matrix a = euler_maruyama_sample(b, 8, sc);
    Matrix c = euler_maruyama_sample(b, 8, sc);
    CHECK(max_abs_diff(a, c) == 0.0);

    SamplerConfig other = sc;
    other.seed = 5;
    Matrix d = euler_maruyama_sample(b, 8, other);
    CHECK(max_abs_diff(a, d) > 0.0);
}

TEST_CASE("trained score model regenerates standard normal latents") {
    const std::size_t n = 2000, d = 2;
    Rng data_rng(41);
    Matrix latents = data_rng.normal_matrix(n, d);

    SdeConfig sde;
    ScoreNetSpec spec;
    spec.d = d;
    spec.tab_proj = 32;
    spec.tab_blocks = 2;
    spec.time_dim = 16;
    DiffusionTrainConfig cfg;
    cfg.steps = 3000;
    cfg.batch = 128;
    Rng rng(43);
    std::vector<double> curve;
    DiffusionBundle b = train_diffusion(latents, sde, spec, cfg, rng, &curve);

    REQUIRE(curve.size() == cfg.steps);
    double head = 0.0, tail = 0.0;
    for (std::size_t i = 0; i < 100; ++i) {
        head += curve[i];
        tail += curve[curve.size() - 1 - i];
    }
    CHECK(tail < head);

    SamplerConfig sc;
    sc.steps = 250;
    sc.seed = 7;
    Matrix samples = euler_maruyama_sample(b, 2000, sc);
    for (std::size_t j = 0; j < d; ++j) {
        double sum = 0.0, sq = 0.0;
        for (std::size_t i = 0; i < samples.rows; ++i) {
            sum += samples(i, j);
            sq += samples(i, j) * samples(i, j);
        }
        const double mean = sum / static_cast<double>(samples.rows);
        const double var = sq / static_cast<double>(samples.rows) - mean * mean;
        CHECK(std::abs(mean) < 0.1);
        CHECK(std::abs(var - 1.0) < 0.2);
    }
}

TEST_CASE("diffusion save and load reproduce sampling exactly") {
    ScoreNetSpec spec;
    spec.variant = ScoreVariant::StasyConcatSquash;
    spec.d = 3;
    spec.stasy_widths = {8, 8};
    Rng rng(23);
    DiffusionBundle b;
    b.spec = spec;
    b.sde.lambda_mode = LambdaWeight::PaperInverseSigma;
    b.sde.sigma_mode = SigmaConvention::PaperFormula;
    b.theta = init_score_params(spec, rng);
    quantize_params_f32(b.theta);
    b.stats.mean = {0.5, -1.0, 2.0};
    b.stats.std = {2.0, 1.0, 0.5};
    b.train_seed = 77;

    fs::path dir = fs::temp_directory_path() / "tabsynth_diffusion_tests";
    fs::create_directories(dir);
    save_diffusion(dir.string(), b);
    DiffusionBundle loaded = load_diffusion(dir.string());

    CHECK(loaded.sde.lambda_mode == b.sde.lambda_mode);
    CHECK(loaded.sde.sigma_mode == b.sde.sigma_mode);
    CHECK(loaded.spec.variant == b.spec.variant);
    CHECK(loaded.spec.stasy_widths == b.spec.stasy_widths);
    CHECK(loaded.stats.mean == b.stats.mean);
    CHECK(loaded.train_seed == b.train_seed);

    SamplerConfig sc;
    sc.steps = 10;
    sc.seed = 2;
    Matrix sa = euler_maruyama_sample(b, 6, sc);
    Matrix sb = euler_maruyama_sample(loaded, 6, sc);
    CHECK(max_abs_diff(sa, sb) == 0.0);
}
