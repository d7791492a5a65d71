// End-to-end acceptance checks for the synthesis engine. Each criterion
// prints exactly one PASS or FAIL line; the exit status is the number of
// failed criteria. Budget-heavy checks (5 and 7) train real models and are
// expected to dominate the runtime.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "support/fixtures.hpp"
#include "tabsynth/gradcheck.hpp"
#include "tabsynth/pipeline.hpp"

namespace fs = std::filesystem;
using namespace tabsynth;

namespace {

std::string num(double v) {
    std::ostringstream out;
    out.precision(6);
    out << v;
    return out.str();
}

const fs::path& workspace() {
    static const fs::path root = [] {
        fs::path p = fs::temp_directory_path() / "tabsynth_acceptance";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return root;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

std::vector<std::string> dir_files(const fs::path& dir) {
    std::vector<std::string> names;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file()) names.push_back(fs::relative(e.path(), dir).generic_string());
    std::sort(names.begin(), names.end());
    return names;
}

std::vector<double> column(const Matrix& m, std::size_t c) {
    std::vector<double> v(m.rows);
    for (std::size_t i = 0; i < m.rows; ++i) v[i] = m(i, c);
    return v;
}

ParamSet concat_params(const ParamSet& a, const ParamSet& b) {
    ParamSet out = a;
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

// Processed rows are already exact codes, so this is the identity decoding.
DecodedTable decoded_from_processed(const ProcessedTable& pt) {
    const BlockLayout& L = pt.layout;
    DecodedTable d;
    d.nums = slice_cols(pt.x, 0, L.num_width());
    d.bins = slice_cols(pt.x, L.bin_off(), L.bin_width());
    d.cats = Matrix(pt.x.rows, L.cat_width());
    for (std::size_t k = 0; k < L.cat_width(); ++k) {
        const double denom = static_cast<double>(L.cat_cards[k] - 1);
        for (std::size_t i = 0; i < pt.x.rows; ++i)
            d.cats(i, k) = std::llround(pt.x(i, L.cat_off() + k) * denom);
    }
    return d;
}

using Problems = std::vector<std::string>;

void expect(Problems& out, bool ok, const std::string& msg) {
    if (!ok) out.push_back(msg);
}

// ---- criterion 1: analytic vs finite-difference gradients, 20 configs ----

void criterion_gradients(Problems& out) {
    int configs = 0;
    const auto note = [&](const GradCheckResult& r, const std::string& what) {
        ++configs;
        expect(out, r.checked > 0, what + ": no parameters checked");
        expect(out, r.max_rel_err < 1e-4, what + ": rel err " + num(r.max_rel_err));
    };
    // step 1e-6 keeps f64 roundoff near 1e-7 relative while shrinking the
    // window in which a probe crosses a relu or clamp kink
    const double fd_step = 1e-6;

    const Activation acts[] = {Activation::ELU, Activation::SiLU, Activation::Sigmoid,
                               Activation::ReLU};
    for (int i = 0; i < 8; ++i) {
        Rng rng(100 + i);
        MlpSpec spec;
        spec.in_width = 2 + i % 4;
        spec.layers.push_back({3 + static_cast<std::size_t>(i % 3), acts[i % 4], 0.0});
        if (i % 2) spec.layers.push_back({4, acts[(i + 1) % 4], 0.0});
        spec.layers.push_back({2 + static_cast<std::size_t>(i % 3), Activation::Identity, 0.0});
        ParamSet params = init_mlp_params(spec, rng);
        const Matrix x = rng.normal_matrix(5, spec.in_width);
        const std::size_t w = spec.out_width();

        const Matrix target = rng.normal_matrix(5, w);
        Matrix btarget(5, w);
        for (double& v : btarget.data) v = static_cast<double>(rng.below(2));
        std::vector<int> classes(5);
        for (int& c : classes) c = static_cast<int>(rng.below(w));

        const int kind = i % 3;
        const auto loss_of = [&](const ParamSet& p) {
            const Matrix y = mlp_forward(spec, p, x, Mode::Train, nullptr);
            if (kind == 0) return mse(y, target).value;
            if (kind == 1) return bce_with_logits(y, btarget).value;
            return ce_with_logits(y, classes).value;
        };
        MlpCache cache;
        const Matrix y = mlp_forward(spec, params, x, Mode::Train, nullptr, &cache);
        const LossResult lr = kind == 0   ? mse(y, target)
                              : kind == 1 ? bce_with_logits(y, btarget)
                                          : ce_with_logits(y, classes);
        const MlpBackwardResult back = mlp_backward(cache, params, lr.grad);
        note(grad_check(params, loss_of, back.param_grads, fd_step), "mlp " + std::to_string(i));
    }

    for (int i = 0; i < 4; ++i) {
        const RawTable t = testfix::mixed_fixture(120, 400 + i);
        SchemaOptions so;
        so.scaler = i % 2 ? ScalerKind::QuantileGauss : ScalerKind::MinMax;
        const TableSchema schema = infer_schema(t, so);
        const ProcessedTable pt = preprocess(t, schema);
        AutoencoderSpec spec;
        spec.hidden = 6 + static_cast<std::size_t>(i);
        spec.enc_blocks = 1;
        spec.dec_blocks = 1;
        spec.loss = i < 2 ? AeLoss::Heterogeneous : AeLoss::MedMse;
        Rng rng(500 + i);
        AutoencoderModel m = make_autoencoder(pt, spec, rng);
        // bias jitter: zero-init biases put dead-relu rows exactly on the
        // numerical clamp boundary, where central differences halve the
        // subgradient
        for (ParamSet* ps : {&m.enc, &m.dec})
            for (Dense& d : *ps)
                for (double& b : d.b) b += 0.05 * rng.normal();
        std::vector<std::size_t> idx(8);
        for (std::size_t r = 0; r < idx.size(); ++r) idx[r] = r * 7;
        const Matrix xb = take_rows(pt.x, idx);

        const AeGrads g = ae_loss_and_grads(m, xb);
        ParamSet params = concat_params(m.enc, m.dec);
        const ParamSet analytic = concat_params(g.enc_grads, g.dec_grads);
        const std::size_t esize = m.enc.size();
        const auto loss_of = [&](const ParamSet& p) {
            AutoencoderModel probe = m;
            probe.enc.assign(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(esize));
            probe.dec.assign(p.begin() + static_cast<std::ptrdiff_t>(esize), p.end());
            return ae_loss(probe, xb);
        };
        note(grad_check(params, loss_of, analytic, fd_step), "autoencoder " + std::to_string(i));
    }

    for (int i = 0; i < 8; ++i) {
        ScoreNetSpec spec;
        spec.d = 2 + static_cast<std::size_t>(i % 3);
        if (i < 4) {
            spec.variant = ScoreVariant::StasyConcatSquash;
            spec.stasy_widths = {5, 4};
        } else {
            spec.variant = ScoreVariant::TabTimeMlp;
            spec.tab_proj = 6;
            spec.tab_blocks = 1 + static_cast<std::size_t>(i % 2);
            spec.time_dim = 4;
        }
        SdeConfig sde;
        sde.lambda_mode = i % 2 ? LambdaWeight::PaperInverseSigma : LambdaWeight::SigmaWeight;
        Rng rng(600 + i);
        ParamSet theta = init_score_params(spec, rng);
        const Matrix x0 = rng.normal_matrix(6, spec.d);
        const DsmDraw dr = draw_dsm(sde, 6, spec.d, rng);
        const DsmResult res = dsm_loss_and_grads(sde, spec, theta, x0, dr);
        const auto loss_of = [&](const ParamSet& p) {
            return dsm_loss_value(
                sde,
                [&](const Matrix& xt, const std::vector<double>& tv) {
                    return score_forward(spec, p, xt, tv, Mode::Train, nullptr);
                },
                x0, dr);
        };
        note(grad_check(theta, loss_of, res.grads, fd_step), "dsm " + std::to_string(i));
    }

    expect(out, configs == 20, "expected 20 configurations, ran " + std::to_string(configs));
}

// ---- criterion 2: codec round trip ----

void criterion_codec(Problems& out) {
    const RawTable t = testfix::mixed_fixture(1000, 7);
    SchemaOptions so;
    so.scaler = ScalerKind::MinMax;
    const TableSchema schema = infer_schema(t, so);
    const ProcessedTable pt = preprocess(t, schema);
    const RawTable back = postprocess(decoded_from_processed(pt), schema);

    for (const char* name : {"flag", "grade"}) {
        const Column& a = t.cols[t.find_col(name)];
        const Column& b = back.cols[back.find_col(name)];
        std::size_t bad = 0;
        for (std::size_t i = 0; i < t.rows; ++i) bad += a.texts[i] != b.texts[i] ? 1u : 0u;
        expect(out, bad == 0,
               std::string(name) + ": " + std::to_string(bad) + " rows differ after round trip");
    }

    for (const char* name : {"weight", "ratio", "dose"}) {
        const Column& a = t.cols[t.find_col(name)];
        const Column& b = back.cols[back.find_col(name)];
        double worst = 0.0;
        for (std::size_t i = 0; i < t.rows; ++i)
            worst = std::max(worst, std::abs(a.nums[i] - b.nums[i]));
        expect(out, worst <= 1e-6, std::string(name) + ": max abs err " + num(worst));
    }

    for (double spike : {3.5, 7.0}) {
        std::size_t src = 0, rt = 0, exact = 0;
        const Column& a = t.cols[t.find_col("dose")];
        const Column& b = back.cols[back.find_col("dose")];
        for (std::size_t i = 0; i < t.rows; ++i) {
            src += a.nums[i] == spike ? 1u : 0u;
            rt += b.nums[i] == spike ? 1u : 0u;
            exact += (a.nums[i] == spike && b.nums[i] == spike) ? 1u : 0u;
        }
        expect(out, src == rt && src == exact,
               "spike " + num(spike) + ": " + std::to_string(src) + " source vs " +
                   std::to_string(rt) + " round-tripped labels");
    }
}

// ---- criterion 3: perturbation kernel identities and moments ----

void criterion_sde_kernel(Problems& out) {
    SdeConfig sde;
    sde.sigma_mode = SigmaConvention::StandardVp;

    expect(out, std::abs(mean_coef(sde, 1.0) - std::exp(-5.025)) < 1e-12,
           "mean_coef(1) off: " + num(mean_coef(sde, 1.0)));
    expect(out, std::abs(marginal_std(sde, 1.0) - std::sqrt(1.0 - std::exp(-10.05))) < 1e-12,
           "sigma(1) off: " + num(marginal_std(sde, 1.0)));

    double worst = 0.0;
    for (int i = 1; i <= 1000; ++i) {
        const double t = sde.eps + (sde.T - sde.eps) * static_cast<double>(i) / 1000.0;
        const double mc = mean_coef(sde, t);
        const double sd = marginal_std(sde, t);
        worst = std::max(worst, std::abs(mc * mc + sd * sd - 1.0));
    }
    expect(out, worst < 1e-12, "variance preservation drift " + num(worst));

    Rng rng(31);
    const std::size_t n = 100000;
    Matrix x0(n, 1);
    for (double& v : x0.data) v = 1.3;
    for (double t : {0.1, 0.5, 0.9}) {
        const Matrix z = rng.normal_matrix(n, 1);
        const Matrix xt = perturb(sde, x0, t, z);
        double mean = 0.0;
        for (double v : xt.data) mean += v;
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (double v : xt.data) var += (v - mean) * (v - mean);
        const double sd_hat = std::sqrt(var / static_cast<double>(n));
        const double sd = marginal_std(sde, t);
        expect(out, std::abs(sd_hat / sd - 1.0) < 0.01,
               "t=" + num(t) + ": sample std " + num(sd_hat) + " vs sigma " + num(sd));
    }
}

// ---- criterion 4: analytic conditional score is the objective's optimum ----

void criterion_dsm_optimum(Problems& out) {
    SdeConfig sde;
    sde.lambda_mode = LambdaWeight::SigmaWeight;
    const double mu[3] = {0.3, -1.2, 2.0};
    const std::size_t n = 4000;
    Matrix x0(n, 3);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < 3; ++j) x0(i, j) = mu[j];

    Rng rng(17);
    const DsmDraw dr = draw_dsm(sde, n, 3, rng);
    const double loss = dsm_loss_value(
        sde,
        [&](const Matrix& xt, const std::vector<double>& tv) {
            Matrix s(xt.rows, xt.cols);
            for (std::size_t i = 0; i < xt.rows; ++i) {
                const double mc = mean_coef(sde, tv[i]);
                const double sd = marginal_std(sde, tv[i]);
                for (std::size_t j = 0; j < xt.cols; ++j)
                    s(i, j) = -(xt(i, j) - mc * mu[j]) / (sd * sd);
            }
            return s;
        },
        x0, dr);
    expect(out, loss < 1e-10, "loss at the analytic score: " + num(loss));
}

// ---- criterion 5: the sampler recovers simple distributions ----

void criterion_recovery(Problems& out) {
    {
        Rng rng(5);
        const Matrix latents = rng.normal_matrix(5000, 2);
        SdeConfig sde;
        ScoreNetSpec spec;  // stock tab network
        DiffusionTrainConfig tc;
        const LatentStats st = fit_latent_stats(latents);
        DiffusionBundle b = train_diffusion(apply_standardize(latents, st), sde, spec, tc, rng);
        b.stats = st;
        SamplerConfig sc;
        sc.steps = 1000;
        sc.seed = 3;
        const Matrix s = euler_maruyama_sample(b, 10000, sc);
        for (std::size_t c = 0; c < 2; ++c) {
            const std::vector<double> v = column(s, c);
            double mean = 0.0;
            for (double x : v) mean += x;
            mean /= static_cast<double>(v.size());
            double var = 0.0;
            for (double x : v) var += (x - mean) * (x - mean);
            var /= static_cast<double>(v.size());
            expect(out, std::abs(mean) < 0.05,
                   "gaussian dim " + std::to_string(c) + ": |mean| " + num(std::abs(mean)));
            expect(out, std::abs(var - 1.0) < 0.15,
                   "gaussian dim " + std::to_string(c) + ": var " + num(var));
        }
    }
    {
        Rng rng(6);
        Matrix mix(5000, 1);
        for (double& v : mix.data) v = (rng.below(2) ? 2.0 : -2.0) + 0.3 * rng.normal();
        SdeConfig sde;
        ScoreNetSpec spec;
        DiffusionTrainConfig tc;
        tc.steps = 6000;
        const LatentStats st = fit_latent_stats(mix);
        DiffusionBundle b = train_diffusion(apply_standardize(mix, st), sde, spec, tc, rng);
        b.stats = st;
        SamplerConfig sc;
        sc.steps = 1000;
        sc.seed = 4;
        const Matrix s = euler_maruyama_sample(b, 4000, sc);
        const double w = wasserstein_1d(column(mix, 0), column(s, 0), false);
        expect(out, w < 0.15, "mixture W1 " + num(w));
    }
}

// ---- criterion 6: library metrics vs independent brute-force oracles ----

double brute_w1(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const std::size_t na = a.size(), nb = b.size();
    // integer mass units: each a element weighs nb, each b element weighs na
    std::size_t i = 0, j = 0;
    long long ra = static_cast<long long>(nb), rb = static_cast<long long>(na);
    double cost = 0.0;
    while (i < na && j < nb) {
        const long long m = std::min(ra, rb);
        cost += static_cast<double>(m) * std::abs(a[i] - b[j]);
        ra -= m;
        rb -= m;
        if (ra == 0) {
            ++i;
            ra = static_cast<long long>(nb);
        }
        if (rb == 0) {
            ++j;
            rb = static_cast<long long>(na);
        }
    }
    return cost / static_cast<double>(na * nb);
}

double brute_js(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::map<std::string, double> pa, pb;
    for (const auto& k : a) pa[k] += 1.0 / static_cast<double>(a.size());
    for (const auto& k : b) pb[k] += 1.0 / static_cast<double>(b.size());
    std::set<std::string> keys;
    for (const auto& [k, v] : pa) keys.insert(k);
    for (const auto& [k, v] : pb) keys.insert(k);
    double js = 0.0;
    for (const auto& k : keys) {
        const double p = pa.count(k) ? pa[k] : 0.0;
        const double q = pb.count(k) ? pb[k] : 0.0;
        const double m = 0.5 * (p + q);
        if (p > 0.0) js += 0.5 * p * std::log2(p / m);
        if (q > 0.0) js += 0.5 * q * std::log2(q / m);
    }
    return js;
}

double brute_pearson_pair(const std::vector<double>& u, const std::vector<double>& v) {
    const double n = static_cast<double>(u.size());
    double mu = 0.0, mv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        mu += u[i];
        mv += v[i];
    }
    mu /= n;
    mv /= n;
    double suv = 0.0, su = 0.0, sv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        suv += (u[i] - mu) * (v[i] - mv);
        su += (u[i] - mu) * (u[i] - mu);
        sv += (v[i] - mv) * (v[i] - mv);
    }
    if (su <= 0.0 || sv <= 0.0) return 0.0;
    return std::clamp(suv / std::sqrt(su * sv), -1.0, 1.0);
}

double brute_entropy(const std::map<std::string, double>& counts, double total) {
    double h = 0.0;
    for (const auto& [k, c] : counts) {
        const double p = c / total;
        if (p > 0.0) h -= p * std::log(p);
    }
    return h;
}

double brute_theils(const std::vector<std::string>& x, const std::vector<std::string>& y) {
    const double n = static_cast<double>(x.size());
    std::map<std::string, double> cx;
    for (const auto& k : x) cx[k] += 1.0;
    const double hx = brute_entropy(cx, n);
    if (hx <= 0.0) return 1.0;
    std::map<std::string, std::map<std::string, double>> by_y;
    std::map<std::string, double> cy;
    for (std::size_t i = 0; i < x.size(); ++i) {
        by_y[y[i]][x[i]] += 1.0;
        cy[y[i]] += 1.0;
    }
    double hxy = 0.0;
    for (const auto& [ky, cnt] : cy) hxy += cnt / n * brute_entropy(by_y[ky], cnt);
    return (hx - hxy) / hx;
}

double brute_corr_ratio(const std::vector<std::string>& cat, const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    std::map<std::string, std::pair<double, double>> groups;  // count, sum
    for (std::size_t i = 0; i < v.size(); ++i) {
        groups[cat[i]].first += 1.0;
        groups[cat[i]].second += v[i];
    }
    double ssb = 0.0, sst = 0.0;
    for (const auto& [k, g] : groups) {
        const double gm = g.second / g.first;
        ssb += g.first * (gm - mean) * (gm - mean);
    }
    for (double x : v) sst += (x - mean) * (x - mean);
    if (sst <= 0.0) return 0.0;
    return std::sqrt(ssb / sst);
}

void criterion_metric_oracles(Problems& out) {
    double worst = 0.0;
    std::string worst_what = "none";
    const auto close = [&](double got, double want, const std::string& what) {
        const double err = std::abs(got - want);
        if (err > worst) {
            worst = err;
            worst_what = what;
        }
    };

    for (int trial = 0; trial < 100; ++trial) {
        Rng rng(9000 + trial);
        const std::size_t na = 1 + rng.below(20), nb = 1 + rng.below(20);
        const std::size_t n = 2 + rng.below(19);
        const char* labels[] = {"a", "b", "c", "d"};

        std::vector<double> va(na), vb(nb);
        for (double& v : va) v = rng.uniform(-3.0, 3.0);
        for (double& v : vb) v = rng.uniform(-3.0, 3.0);
        close(wasserstein_1d(va, vb, false), brute_w1(va, vb), "wd trial " + std::to_string(trial));

        std::vector<std::string> ka(na), kb(nb);
        for (auto& k : ka) k = labels[rng.below(3)];
        for (auto& k : kb) k = labels[rng.below(4)];
        close(js_divergence(ka, kb), brute_js(ka, kb), "js trial " + std::to_string(trial));

        std::vector<std::vector<double>> cols(3, std::vector<double>(n));
        for (auto& col : cols)
            for (double& v : col) v = rng.uniform(-2.0, 2.0);
        if (trial % 7 == 0) cols[1].assign(n, 0.25);  // constant column convention
        const Matrix pm = pearson_matrix(cols);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) {
                const double want = i == j ? 1.0 : brute_pearson_pair(cols[i], cols[j]);
                close(pm(i, j), want, "pearson trial " + std::to_string(trial));
            }

        std::vector<std::string> cx(n), cy(n);
        for (auto& k : cx) k = labels[rng.below(1 + trial % 4)];
        for (auto& k : cy) k = labels[rng.below(3)];
        close(theils_u(cx, cy), brute_theils(cx, cy), "theils trial " + std::to_string(trial));
        close(correlation_ratio(cx, cols[0]), brute_corr_ratio(cx, cols[0]),
              "corr ratio trial " + std::to_string(trial));

        // dcr over a two-numeric one-categorical pair of tables
        const std::size_t nr = 1 + rng.below(20), ns = 1 + rng.below(20);
        const auto mk = [&](std::size_t rows) {
            RawTable t;
            t.rows = rows;
            Column n1, n2, c1;
            n1.name = "u";
            n2.name = "v";
            c1.name = "k";
            c1.text = true;
            for (std::size_t i = 0; i < rows; ++i) {
                n1.nums.push_back(rng.uniform(-4.0, 4.0) + 0.5);
                n2.nums.push_back(rng.uniform(0.0, 2.0) + 0.25);
                c1.texts.push_back(labels[rng.below(3)]);
            }
            t.cols = {n1, n2, c1};
            return t;
        };
        const RawTable real = mk(nr), syn = mk(ns);
        const TableSchema schema = infer_schema(real, SchemaOptions{});
        double mean = 0.0;
        for (std::size_t i = 0; i < ns; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < nr; ++j) {
                double d2 = 0.0;
                for (int c = 0; c < 2; ++c) {
                    const double diff = syn.cols[c].nums[i] - real.cols[c].nums[j];
                    d2 += diff * diff;
                }
                d2 += syn.cols[2].texts[i] != real.cols[2].texts[j] ? 2.0 : 0.0;
                best = std::min(best, std::sqrt(d2));
            }
            mean += best;
        }
        mean /= static_cast<double>(ns);
        close(mean_dcr(real, syn, schema, false), mean, "dcr trial " + std::to_string(trial));
    }
    expect(out, worst < 1e-9, "largest oracle gap " + num(worst) + " at " + worst_what);
}

// ---- criterion 7: desk-scale end-to-end fidelity ----

void criterion_end_to_end(Problems& out) {
    const fs::path dir = workspace() / "end_to_end";
    fs::create_directories(dir);
    const RawTable real = testfix::mixed_fixture(1000, 77);
    const std::string real_csv = (dir / "real.csv").string();
    write_csv(real_csv, real);

    nlohmann::json j;
    j["variant"] = "tab_autodiff";
    j["data_csv"] = real_csv;
    j["target"] = "flag";
    j["out_dir"] = (dir / "model").string();
    j["seed"] = 2;
    j["autoencoder"]["hidden"] = 64;
    j["autoencoder"]["epochs"] = 500;
    j["diffusion"]["steps"] = 6000;
    j["diffusion"]["batch"] = 192;
    j["diffusion"]["score"]["tab_proj"] = 64;
    j["diffusion"]["score"]["tab_blocks"] = 2;
    j["diffusion"]["score"]["time_dim"] = 16;
    j["sampler"]["steps"] = 1000;
    const RunConfig cfg = parse_run_config(j);
    fit_run(cfg);
    const RawTable syn = sample_run(cfg.out_dir, 1000, 12, (dir / "syn.csv").string());

    const TableSchema schema = infer_schema(real, cfg.schema_opts);
    const KindColumns rk = kind_columns(real, schema);
    const KindColumns sk = kind_columns(syn, schema);

    // (a) every numerical column beats same-range uniform noise on normalized WD
    for (std::size_t c = 0; c < rk.num_names.size(); ++c) {
        const auto [lo, hi] =
            std::minmax_element(rk.num_vals[c].begin(), rk.num_vals[c].end());
        Rng rng(770 + c);
        std::vector<double> noise(real.rows);
        for (double& v : noise) v = rng.uniform(*lo, *hi);
        const double wd_model = wasserstein_1d(rk.num_vals[c], sk.num_vals[c], true);
        const double wd_noise = wasserstein_1d(rk.num_vals[c], noise, true);
        expect(out, wd_model < wd_noise,
               rk.num_names[c] + ": WD " + num(wd_model) + " not below noise " + num(wd_noise));
    }

    // (b) repeated-value frequencies of the mixed column
    const Column& rd = real.cols[real.find_col("dose")];
    const Column& sd = syn.cols[syn.find_col("dose")];
    for (double spike : {3.5, 7.0}) {
        double fr = 0.0, fsyn = 0.0;
        for (double v : rd.nums) fr += v == spike ? 1.0 : 0.0;
        for (double v : sd.nums) fsyn += v == spike ? 1.0 : 0.0;
        fr /= static_cast<double>(real.rows);
        fsyn /= static_cast<double>(syn.rows);
        expect(out, std::abs(fr - fsyn) <= 0.10,
               "spike " + num(spike) + ": real freq " + num(fr) + " vs synthetic " + num(fsyn));
    }

    // (c) association structure beats an independent column shuffle
    RawTable shuffled = real;
    for (std::size_t c = 0; c < shuffled.cols.size(); ++c) {
        Rng rng(88000 + c);
        const std::vector<std::size_t> perm = rng.permutation(real.rows);
        Column& col = shuffled.cols[c];
        Column src = col;
        for (std::size_t i = 0; i < real.rows; ++i) {
            if (col.text) col.texts[i] = src.texts[perm[i]];
            else col.nums[i] = src.nums[perm[i]];
        }
    }
    const CorrelationMatrices mr = correlation_matrices(real, schema);
    const CorrDiffs model_diff = corr_l2_diff(mr, correlation_matrices(syn, schema));
    const CorrDiffs shuffle_diff = corr_l2_diff(mr, correlation_matrices(shuffled, schema));
    expect(out, model_diff.pearson < shuffle_diff.pearson,
           "pearson L2 " + num(model_diff.pearson) + " not below shuffle " +
               num(shuffle_diff.pearson));
    expect(out, model_diff.theils < shuffle_diff.theils,
           "theils L2 " + num(model_diff.theils) + " not below shuffle " +
               num(shuffle_diff.theils));
    expect(out, model_diff.ratio < shuffle_diff.ratio,
           "corr ratio L2 " + num(model_diff.ratio) + " not below shuffle " +
               num(shuffle_diff.ratio));
}

// ---- criterion 8: TSTR identity when synthetic is the real train split ----

bool scores_equal(const ModelScores& a, const ModelScores& b) {
    const auto same = [](double x, double y) {
        return (std::isnan(x) && std::isnan(y)) || x == y;
    };
    return a.model == b.model && a.degenerate == b.degenerate && same(a.accuracy, b.accuracy) &&
           same(a.macro_f1, b.macro_f1) && same(a.auroc, b.auroc) && same(a.r2, b.r2) &&
           same(a.rmse, b.rmse);
}

void criterion_tstr_identity(Problems& out) {
    {
        const RawTable real = testfix::mixed_fixture(240, 3);
        TstrConfig cfg;
        cfg.task = TaskKind::Binary;
        cfg.seed = 7;
        std::vector<std::size_t> train_idx, test_idx;
        tstr_split_indices(real.rows, cfg.split, cfg.seed, &train_idx, &test_idx);
        const TstrResult res =
            tstr_evaluate(real, take_table_rows(real, train_idx), "flag", cfg);
        for (std::size_t i = 0; i < res.on_real.size(); ++i) {
            expect(out, scores_equal(res.on_real[i], res.on_syn[i]),
                   "classification scores differ for " + res.on_real[i].model);
            expect(out, std::isfinite(res.on_real[i].auroc),
                   "classification AUROC not finite for " + res.on_real[i].model);
        }
    }
    {
        const RawTable real = testfix::regression_fixture(220, 6);
        TstrConfig cfg;
        cfg.task = TaskKind::Regression;
        cfg.seed = 23;
        std::vector<std::size_t> train_idx, test_idx;
        tstr_split_indices(real.rows, cfg.split, cfg.seed, &train_idx, &test_idx);
        const TstrResult res = tstr_evaluate(real, take_table_rows(real, train_idx), "y", cfg);
        for (std::size_t i = 0; i < res.on_real.size(); ++i) {
            expect(out, scores_equal(res.on_real[i], res.on_syn[i]),
                   "regression scores differ for " + res.on_real[i].model);
            expect(out, std::isfinite(res.on_real[i].r2) && std::isfinite(res.on_real[i].rmse),
                   "regression scores not finite for " + res.on_real[i].model);
        }
    }
}

// ---- criterion 9: DCR is zero on memorized rows and grows with noise ----

void criterion_dcr_sanity(Problems& out) {
    const RawTable real = testfix::mixed_fixture(300, 13);
    const TableSchema schema = infer_schema(real, SchemaOptions{});
    std::vector<std::size_t> train_idx(240);
    for (std::size_t i = 0; i < train_idx.size(); ++i) train_idx[i] = i;
    const RawTable train = take_table_rows(real, train_idx);

    const double dcr0 = mean_dcr(real, train, schema, false);
    expect(out, dcr0 == 0.0, "memorized train split: mean DCR " + num(dcr0));

    // one shared noise draw so the sweep is a pure scale comparison
    Rng rng(4242);
    std::vector<std::vector<double>> z;
    for (const Column& c : train.cols)
        if (!c.text) {
            z.emplace_back(train.rows);
            for (double& v : z.back()) v = rng.normal();
        }
    std::vector<double> dcrs;
    for (double s : {0.01, 0.1, 1.0}) {
        RawTable noisy = train;
        std::size_t k = 0;
        for (Column& c : noisy.cols)
            if (!c.text) {
                for (std::size_t i = 0; i < c.nums.size(); ++i) c.nums[i] += s * z[k][i];
                ++k;
            }
        dcrs.push_back(mean_dcr(real, noisy, schema, false));
    }
    expect(out, dcrs[0] > 0.0 && dcrs[0] < dcrs[1] && dcrs[1] < dcrs[2],
           "mean DCR not increasing: " + num(dcrs[0]) + ", " + num(dcrs[1]) + ", " +
               num(dcrs[2]));
}

// ---- criterion 10: determinism and persistence across all variants ----

nlohmann::json tiny_fit_json(const std::string& variant, const std::string& data_csv,
                             const std::string& out_dir) {
    nlohmann::json j;
    j["variant"] = variant;
    j["data_csv"] = data_csv;
    j["target"] = "flag";
    j["out_dir"] = out_dir;
    j["seed"] = 11;
    j["autoencoder"]["hidden"] = 16;
    j["autoencoder"]["enc_blocks"] = 1;
    j["autoencoder"]["dec_blocks"] = 1;
    j["autoencoder"]["epochs"] = 30;
    j["autoencoder"]["batch"] = 64;
    j["diffusion"]["steps"] = 120;
    j["diffusion"]["batch"] = 64;
    j["diffusion"]["score"]["tab_proj"] = 16;
    j["diffusion"]["score"]["tab_blocks"] = 1;
    j["diffusion"]["score"]["time_dim"] = 8;
    j["diffusion"]["score"]["stasy_widths"] = std::vector<std::size_t>{24, 24};
    j["gan"]["width"] = 16;
    j["gan"]["blocks"] = 1;
    j["gan"]["steps"] = 120;
    j["gan"]["batch"] = 32;
    j["sampler"]["steps"] = 50;
    j["sampler"]["batch"] = 512;
    return j;
}

bool same_matrix(const Matrix& a, const Matrix& b) {
    return a.rows == b.rows && a.cols == b.cols && a.data == b.data;
}

void criterion_determinism(Problems& out) {
    const fs::path dir = workspace() / "determinism";
    fs::create_directories(dir);
    const RawTable table = testfix::mixed_fixture(260, 21);
    const std::string csv = (dir / "train.csv").string();
    write_csv(csv, table);

    for (const char* variant :
         {"stasy_autodiff", "tab_autodiff", "med_autodiff", "autogan"}) {
        const std::string out_dir = (dir / variant).string();
        const RunConfig cfg = parse_run_config(tiny_fit_json(variant, csv, out_dir));
        fit_run(cfg);
        const fs::path ref = out_dir + "_ref";
        fs::rename(out_dir, ref);
        fit_run(cfg);
        bool identical = dir_files(out_dir) == dir_files(ref);
        if (identical)
            for (const std::string& f : dir_files(out_dir))
                identical = identical && slurp(fs::path(out_dir) / f) == slurp(ref / f);
        expect(out, identical, std::string(variant) + ": repeated fit not byte-identical");

        const std::string s1 = (dir / (std::string(variant) + "_s1.csv")).string();
        const std::string s2 = (dir / (std::string(variant) + "_s2.csv")).string();
        sample_run(out_dir, 50, 9, s1);
        sample_run(out_dir, 50, 9, s2);
        expect(out, slurp(s1) == slurp(s2),
               std::string(variant) + ": repeated sample not byte-identical");
    }

    // in-memory models against their reloaded copies
    {
        const TableSchema schema = infer_schema(table, SchemaOptions{});
        const ProcessedTable pt = preprocess(table, schema);
        AutoencoderSpec spec;
        spec.hidden = 12;
        spec.enc_blocks = 1;
        spec.dec_blocks = 1;
        Rng rng(33);
        AeTrainConfig tc;
        tc.epochs = 20;
        tc.batch = 64;
        AutoencoderModel ae = train_autoencoder(pt, spec, tc, rng);
        quantize_params_f32(ae.enc);
        quantize_params_f32(ae.dec);
        const std::string ae_dir = (dir / "ae_direct").string();
        fs::create_directories(ae_dir);
        save_autoencoder(ae_dir, ae);
        const AutoencoderModel back = load_autoencoder(ae_dir);
        expect(out, same_matrix(encode(ae, pt.x), encode(back, pt.x)),
               "autoencoder: reloaded encoder drifts");
    }
    for (const ScoreVariant variant :
         {ScoreVariant::TabTimeMlp, ScoreVariant::StasyConcatSquash}) {
        Rng rng(34);
        const Matrix latents = rng.normal_matrix(200, 2);
        SdeConfig sde;
        ScoreNetSpec spec;
        spec.variant = variant;
        spec.stasy_widths = {8, 8};
        spec.tab_proj = 8;
        spec.tab_blocks = 1;
        spec.time_dim = 4;
        DiffusionTrainConfig tc;
        tc.steps = 100;
        tc.batch = 32;
        DiffusionBundle b = train_diffusion(latents, sde, spec, tc, rng);
        b.stats = fit_latent_stats(latents);
        quantize_params_f32(b.theta);
        const std::string d_dir =
            (dir / (std::string("diff_direct_") + score_variant_name(variant))).string();
        fs::create_directories(d_dir);
        save_diffusion(d_dir, b);
        const DiffusionBundle back = load_diffusion(d_dir);
        SamplerConfig sc;
        sc.steps = 40;
        sc.seed = 8;
        expect(out,
               same_matrix(euler_maruyama_sample(b, 64, sc), euler_maruyama_sample(back, 64, sc)),
               std::string(score_variant_name(variant)) + ": reloaded sampler drifts");
    }
    {
        Rng rng(35);
        const Matrix latents = rng.normal_matrix(200, 2);
        GanSpec spec;
        spec.width = 16;
        spec.blocks = 1;
        GanTrainConfig tc;
        tc.steps = 100;
        tc.batch = 32;
        GanModel g = train_gan(latents, spec, tc, rng);
        g.stats = fit_latent_stats(latents);
        quantize_params_f32(g.gen);
        quantize_params_f32(g.disc);
        const std::string g_dir = (dir / "gan_direct").string();
        fs::create_directories(g_dir);
        save_gan(g_dir, g);
        const GanModel back = load_gan(g_dir);
        expect(out, same_matrix(gan_sample(g, 64, 8), gan_sample(back, 64, 8)),
               "gan: reloaded sampler drifts");
    }

    // evaluation over fixed inputs is reproducible to the byte
    {
        const RawTable twin = testfix::mixed_fixture(260, 22);
        const std::string twin_csv = (dir / "twin.csv").string();
        write_csv(twin_csv, twin);
        EvaluateOptions opts;
        opts.target = "flag";
        const std::string r1 = (dir / "report_a").string();
        const std::string r2 = (dir / "report_b").string();
        evaluate_run(csv, {twin_csv}, opts, r1);
        evaluate_run(csv, {twin_csv}, opts, r2);
        expect(out, slurp(fs::path(r1) / "report.json") == slurp(fs::path(r2) / "report.json"),
               "repeated evaluation not byte-identical");
    }
}

struct Criterion {
    int id;
    const char* label;
    std::function<void(Problems&)> body;
};

}  // namespace

// Runs every criterion by default; numeric arguments select a subset, e.g.
// `acceptance 1 5` while iterating on a fix.
int main(int argc, char** argv) {
    workspace();
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
    const std::vector<Criterion> criteria = {
        {1, "gradient correctness, 20 configurations", criterion_gradients},
        {2, "mixed-type codec round trip", criterion_codec},
        {3, "perturbation kernel identities and moments", criterion_sde_kernel},
        {4, "analytic score minimizes the DSM objective", criterion_dsm_optimum},
        {5, "sampler recovers gaussian and mixture targets", criterion_recovery},
        {6, "metrics match brute-force oracles", criterion_metric_oracles},
        {7, "end-to-end fidelity on the mixed fixture", criterion_end_to_end},
        {8, "TSTR identity on a memorized train split", criterion_tstr_identity},
        {9, "DCR zero on memorization, monotone in noise", criterion_dcr_sanity},
        {10, "deterministic refit, resample and reload", criterion_determinism},
    };

    int failed = 0;
    int ran = 0;
    for (const Criterion& c : criteria) {
        if (!only.empty() && !only.count(c.id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Problems problems;
        try {
            c.body(problems);
        } catch (const std::exception& e) {
            problems.push_back(std::string("exception: ") + e.what());
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::ostringstream line;
        line.precision(1);
        line << std::fixed << (problems.empty() ? "PASS" : "FAIL") << " criterion " << c.id
             << " (" << c.label << ") [" << secs << "s]";
        std::cout << line.str() << "\n";
        for (const std::string& p : problems) std::cout << "       " << p << "\n";
        failed += problems.empty() ? 0 : 1;
        ++ran;
    }
    std::cout << "acceptance: " << (ran - failed) << "/" << ran << " criteria passed\n";
    return failed;
}
