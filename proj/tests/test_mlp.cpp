#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <tabsynth/adam.hpp>
#include <tabsynth/gradcheck.hpp>
#include <tabsynth/losses.hpp>
#include <tabsynth/mlp.hpp>
#include <tabsynth/rng.hpp>

using namespace tabsynth;

TEST_CASE("bce_with_logits reference values and stability") {
    Matrix logits(1, 1, {0.0});
    Matrix target(1, 1, {1.0});
    auto r = bce_with_logits(logits, target);
    CHECK(r.value == Catch::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(r.grad(0, 0) == Catch::Approx(-0.5).epsilon(1e-12));

    Matrix big(1, 2, {1000.0, -1000.0});
    Matrix tgt(1, 2, {1.0, 0.0});
    auto rb = bce_with_logits(big, tgt);
    CHECK(std::isfinite(rb.value));
    CHECK(rb.value < 1e-6);
}

TEST_CASE("ce_with_logits uniform logits give log K") {
    Matrix logits(2, 4);
    auto r = ce_with_logits(logits, {0, 3});
    CHECK(r.value == Catch::Approx(std::log(4.0)).epsilon(1e-12));
    // grad is softmax minus one-hot, averaged over the batch
    CHECK(r.grad(0, 0) == Catch::Approx((0.25 - 1.0) / 2.0).epsilon(1e-12));
    CHECK(r.grad(0, 1) == Catch::Approx(0.25 / 2.0).epsilon(1e-12));

    Matrix shifted(2, 4);
    for (double& v : shifted.data) v = 1000.0;
    auto rs = ce_with_logits(shifted, {0, 3});
    CHECK(rs.value == Catch::Approx(std::log(4.0)).epsilon(1e-9));
}

TEST_CASE("mse value and gradient") {
    Matrix pred(1, 2, {1.0, 3.0});
    Matrix target(1, 2, {0.0, 1.0});
    auto r = mse(pred, target);
    CHECK(r.value == Catch::Approx((1.0 + 4.0) / 2.0).epsilon(1e-12));
    CHECK(r.grad(0, 0) == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(r.grad(0, 1) == Catch::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("zero-weight mlp outputs its bias") {
    MlpSpec spec;
    spec.in_width = 3;
    spec.layers = {{2, Activation::Identity, 0.0}};
    ParamSet p;
    p.push_back({Matrix(2, 3), {0.5, -1.5}});
    Rng rng(0);
    Matrix x = rng.normal_matrix(4, 3);
    Matrix y = mlp_forward(spec, p, x, Mode::Eval);
    for (std::size_t i = 0; i < y.rows; ++i) {
        CHECK(y(i, 0) == 0.5);
        CHECK(y(i, 1) == -1.5);
    }
}

TEST_CASE("mlp analytic gradients match finite differences") {
    MlpSpec spec;
    spec.in_width = 4;
    spec.layers = {{6, Activation::ReLU, 0.0}, {5, Activation::SiLU, 0.0}, {3, Activation::Identity, 0.0}};
    Rng rng(17);
    ParamSet params = init_mlp_params(spec, rng);
    Matrix x = rng.normal_matrix(8, 4);
    Matrix target = rng.normal_matrix(8, 3);

    MlpCache cache;
    Matrix out = mlp_forward(spec, params, x, Mode::Train, nullptr, &cache);
    auto loss = mse(out, target);
    auto back = mlp_backward(cache, params, loss.grad);

    auto loss_fn = [&](const ParamSet& p) {
        Matrix o = mlp_forward(spec, p, x, Mode::Eval);
        return mse(o, target).value;
    };
    auto res = grad_check(params, loss_fn, back.param_grads);
    CHECK(res.checked > 0);
    CHECK(res.max_rel_err < 1e-5);
}

TEST_CASE("mlp input gradient matches finite differences") {
    MlpSpec spec;
    spec.in_width = 3;
    spec.layers = {{4, Activation::ReLU, 0.0}, {2, Activation::Identity, 0.0}};
    Rng rng(23);
    ParamSet params = init_mlp_params(spec, rng);
    Matrix x = rng.normal_matrix(5, 3);
    Matrix target = rng.normal_matrix(5, 2);

    MlpCache cache;
    Matrix out = mlp_forward(spec, params, x, Mode::Train, nullptr, &cache);
    auto back = mlp_backward(cache, params, mse(out, target).grad);

    const double step = 1e-6;
    double max_err = 0.0;
    for (std::size_t i = 0; i < x.data.size(); ++i) {
        double orig = x.data[i];
        x.data[i] = orig + step;
        double up = mse(mlp_forward(spec, params, x, Mode::Eval), target).value;
        x.data[i] = orig - step;
        double down = mse(mlp_forward(spec, params, x, Mode::Eval), target).value;
        x.data[i] = orig;
        double num = (up - down) / (2.0 * step);
        max_err = std::max(max_err, std::abs(num - back.grad_input.data[i]));
    }
    CHECK(max_err < 1e-6);
}

TEST_CASE("dropout is identity in eval and unbiased in train") {
    MlpSpec spec;
    spec.in_width = 2;
    spec.layers = {{50, Activation::Identity, 0.4}, {1, Activation::Identity, 0.0}};
    Rng rng(31);
    ParamSet params = init_mlp_params(spec, rng);
    Matrix x(1, 2, {1.0, -0.5});

    Matrix eval1 = mlp_forward(spec, params, x, Mode::Eval);
    Matrix eval2 = mlp_forward(spec, params, x, Mode::Eval);
    CHECK(eval1(0, 0) == eval2(0, 0));

    Rng drng(77);
    double sum = 0.0;
    const int trials = 4000;
    for (int i = 0; i < trials; ++i) sum += mlp_forward(spec, params, x, Mode::Train, &drng)(0, 0);
    double mean = sum / trials;
    // inverted dropout keeps the expectation at the eval output
    CHECK(std::abs(mean - eval1(0, 0)) < 0.05 * std::max(1.0, std::abs(eval1(0, 0))));
}

TEST_CASE("adam first step moves by lr in the gradient sign direction") {
    ParamSet params;
    params.push_back({Matrix(1, 2, {1.0, -2.0}), {0.5}});
    ParamSet grads;
    grads.push_back({Matrix(1, 2, {0.3, -0.7}), {0.0}});
    AdamConfig cfg;
    cfg.lr = 0.01;
    AdamState state = AdamState::make(params, cfg);
    adam_step(params, grads, state);
    // with bias correction the first update is exactly lr * sign(g) (eps-level error)
    CHECK(params[0].w(0, 0) == Catch::Approx(1.0 - 0.01).epsilon(1e-6));
    CHECK(params[0].w(0, 1) == Catch::Approx(-2.0 + 0.01).epsilon(1e-6));
    CHECK(params[0].b[0] == 0.5);
}

TEST_CASE("init_dense respects the kaiming uniform bound") {
    Rng rng(3);
    Dense d = init_dense(16, 9, rng);
    const double bound = std::sqrt(6.0 / 9.0);
    for (double v : d.w.data) {
        REQUIRE(std::abs(v) <= bound);
    }
    for (double v : d.b) REQUIRE(v == 0.0);
    double lo = 1e9, hi = -1e9;
    for (double v : d.w.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    CHECK(lo < -0.5 * bound);
    CHECK(hi > 0.5 * bound);
}
