#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <tabsynth/csv.hpp>
#include <tabsynth/matrix.hpp>
#include <tabsynth/models.hpp>
#include <tabsynth/rng.hpp>
#include <tabsynth/table.hpp>

namespace tabsynth {

enum class TaskKind { Binary, Multiclass, Regression };

inline const char* task_name(TaskKind t) {
    switch (t) {
        case TaskKind::Binary: return "binary";
        case TaskKind::Multiclass: return "multiclass";
        default: return "regression";
    }
}

inline TaskKind task_from_name(const std::string& s) {
    if (s == "binary") return TaskKind::Binary;
    if (s == "multiclass") return TaskKind::Multiclass;
    if (s == "regression") return TaskKind::Regression;
    throw ModelError("unknown task kind '" + s + "'");
}

struct TstrConfig {
    TaskKind task = TaskKind::Binary;
    double split = 0.8;
    std::uint64_t seed = 0;
    std::vector<std::string> models;  // empty = task defaults
    LogisticRegressionConfig logreg;
    TreeConfig tree;
    std::size_t knn_k = 5;

    std::vector<std::string> model_list() const {
        if (!models.empty()) return models;
        if (task == TaskKind::Regression) return {"linear_regression", "tree_regressor"};
        return {"logistic_regression", "decision_tree", "knn"};
    }
};

// ---- scoring helpers ----

inline double accuracy(const std::vector<int>& y, const std::vector<int>& pred) {
    if (y.empty() || y.size() != pred.size()) throw ModelError("accuracy: size mismatch");
    double hits = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) hits += y[i] == pred[i] ? 1.0 : 0.0;
    return hits / static_cast<double>(y.size());
}

// Macro F1 over the classes present in the truth or the predictions; a class
// with no predicted and no true positives scores 0.
inline double macro_f1(const std::vector<int>& y, const std::vector<int>& pred) {
    if (y.empty() || y.size() != pred.size()) throw ModelError("macro_f1: size mismatch");
    std::set<int> classes(y.begin(), y.end());
    classes.insert(pred.begin(), pred.end());
    double sum = 0.0;
    for (int c : classes) {
        double tp = 0.0, fp = 0.0, fn = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (pred[i] == c && y[i] == c) tp += 1.0;
            else if (pred[i] == c) fp += 1.0;
            else if (y[i] == c) fn += 1.0;
        }
        const double denom = 2.0 * tp + fp + fn;
        sum += denom > 0.0 ? 2.0 * tp / denom : 0.0;
    }
    return sum / static_cast<double>(classes.size());
}

// Rank-based AUROC (Mann-Whitney with midranks for ties). NaN when the truth
// is single-class.
inline double auroc_binary(const std::vector<int>& y, const std::vector<double>& score) {
    if (y.empty() || y.size() != score.size()) throw ModelError("auroc: size mismatch");
    std::vector<std::size_t> order(y.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (score[a] != score[b]) return score[a] < score[b];
        return a < b;
    });
    double rank_pos = 0.0, n_pos = 0.0;
    std::size_t k = 0;
    while (k < order.size()) {
        std::size_t e = k;
        while (e + 1 < order.size() && score[order[e + 1]] == score[order[k]]) ++e;
        const double mid = 0.5 * static_cast<double>(k + e) + 1.0;
        for (std::size_t t = k; t <= e; ++t)
            if (y[order[t]] == 1) {
                rank_pos += mid;
                n_pos += 1.0;
            }
        k = e + 1;
    }
    const double n_neg = static_cast<double>(y.size()) - n_pos;
    if (n_pos == 0.0 || n_neg == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return (rank_pos - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

// Macro one-vs-rest over classes that appear in the truth with both a
// positive and a negative example.
inline double auroc_macro_ovr(const std::vector<int>& y, const Matrix& proba) {
    if (y.size() != proba.rows) throw ModelError("auroc: size mismatch");
    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t c = 0; c < proba.cols; ++c) {
        std::vector<int> yc(y.size());
        std::vector<double> sc(y.size());
        std::size_t pos = 0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            yc[i] = y[i] == static_cast<int>(c) ? 1 : 0;
            pos += static_cast<std::size_t>(yc[i]);
            sc[i] = proba(i, c);
        }
        if (pos == 0 || pos == y.size()) continue;
        sum += auroc_binary(yc, sc);
        ++used;
    }
    if (used == 0) return std::numeric_limits<double>::quiet_NaN();
    return sum / static_cast<double>(used);
}

inline double rmse(const std::vector<double>& y, const std::vector<double>& pred) {
    if (y.empty() || y.size() != pred.size()) throw ModelError("rmse: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += (y[i] - pred[i]) * (y[i] - pred[i]);
    return std::sqrt(s / static_cast<double>(y.size()));
}

// R^2 against the truth's own mean; a constant truth makes it undefined.
inline double r2_score(const std::vector<double>& y, const std::vector<double>& pred) {
    if (y.empty() || y.size() != pred.size()) throw ModelError("r2: size mismatch");
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        ss_res += (y[i] - pred[i]) * (y[i] - pred[i]);
        ss_tot += (y[i] - mean) * (y[i] - mean);
    }
    if (ss_tot <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    return 1.0 - ss_res / ss_tot;
}

// ---- featurization ----

namespace detail {

// One-hot layout shared by every model in a comparison so class indices and
// feature slots line up between the real and synthetic training sets.
struct FeaturePlan {
    std::vector<std::size_t> num_cols;                       // indices into the table
    std::vector<std::size_t> cat_cols;
    std::vector<std::map<std::string, std::size_t>> cat_slots;  // per cat col
    std::size_t width = 0;
};

inline std::vector<std::string> tstr_keys(const Column& c) {
    if (c.text) return c.texts;
    std::vector<std::string> out(c.nums.size());
    for (std::size_t i = 0; i < c.nums.size(); ++i) out[i] = format_double(c.nums[i]);
    return out;
}

inline FeaturePlan make_feature_plan(const std::vector<const RawTable*>& tables,
                                     std::size_t target_idx) {
    const RawTable& first = *tables.front();
    FeaturePlan plan;
    for (std::size_t c = 0; c < first.cols.size(); ++c) {
        if (c == target_idx) continue;
        bool numeric = !first.cols[c].text;
        for (const RawTable* t : tables) numeric = numeric && !t->cols[c].text;
        if (numeric) {
            plan.num_cols.push_back(c);
        } else {
            plan.cat_cols.push_back(c);
            std::map<std::string, std::size_t> slots;
            for (const RawTable* t : tables)
                for (const std::string& k : tstr_keys(t->cols[c])) slots.emplace(k, slots.size());
            plan.cat_slots.push_back(std::move(slots));
        }
    }
    plan.width = plan.num_cols.size();
    for (const auto& s : plan.cat_slots) plan.width += s.size();
    return plan;
}

// Numeric columns are z-scored with the fitting table's own statistics;
// one-hot blocks stay 0/1.
struct FeatureScaler {
    std::vector<double> mean, std;
};

inline Matrix featurize(const RawTable& t, const FeaturePlan& plan, const FeatureScaler* fitted,
                        FeatureScaler* out_scaler) {
    Matrix x(t.rows, plan.width);
    for (std::size_t k = 0; k < plan.num_cols.size(); ++k) {
        const std::vector<double>& v = t.cols[plan.num_cols[k]].nums;
        double m = 0.0, s = 1.0;
        if (fitted) {
            m = fitted->mean[k];
            s = fitted->std[k];
        } else {
            for (double u : v) m += u;
            m /= static_cast<double>(v.size());
            double var = 0.0;
            for (double u : v) var += (u - m) * (u - m);
            s = std::sqrt(var / static_cast<double>(v.size()));
            if (s < 1e-12) s = 1.0;
            out_scaler->mean.push_back(m);
            out_scaler->std.push_back(s);
        }
        for (std::size_t i = 0; i < t.rows; ++i) x(i, k) = (v[i] - m) / s;
    }
    std::size_t off = plan.num_cols.size();
    for (std::size_t k = 0; k < plan.cat_cols.size(); ++k) {
        const std::vector<std::string> keys = tstr_keys(t.cols[plan.cat_cols[k]]);
        for (std::size_t i = 0; i < t.rows; ++i) {
            const auto it = plan.cat_slots[k].find(keys[i]);
            if (it == plan.cat_slots[k].end())
                throw ModelError("featurize: unseen category '" + keys[i] + "'");
            x(i, off + it->second) = 1.0;
        }
        off += plan.cat_slots[k].size();
    }
    return x;
}

inline std::vector<int> encode_labels(const Column& c, const std::map<std::string, int>& codes) {
    std::vector<int> y(c.size());
    const std::vector<std::string> keys = tstr_keys(c);
    for (std::size_t i = 0; i < keys.size(); ++i) {
        const auto it = codes.find(keys[i]);
        if (it == codes.end()) throw ModelError("target: unseen label '" + keys[i] + "'");
        y[i] = it->second;
    }
    return y;
}

}  // namespace detail

// Seeded 80/20 split of the real table; first block trains, remainder tests.
inline void tstr_split_indices(std::size_t n, double ratio, std::uint64_t seed,
                               std::vector<std::size_t>* train, std::vector<std::size_t>* test) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw ModelError("tstr: split ratio outside (0,1)");
    if (n < 2) throw ModelError("tstr: need at least 2 rows");
    Rng rng(seed);
    const std::vector<std::size_t> perm = rng.permutation(n);
    std::size_t n_train = static_cast<std::size_t>(ratio * static_cast<double>(n));
    n_train = std::min(std::max<std::size_t>(n_train, 1), n - 1);
    train->assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
    test->assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
}

struct ModelScores {
    std::string model;
    bool degenerate = false;  // single-class training target; AUROC omitted
    double accuracy = std::numeric_limits<double>::quiet_NaN();
    double macro_f1 = std::numeric_limits<double>::quiet_NaN();
    double auroc = std::numeric_limits<double>::quiet_NaN();
    double r2 = std::numeric_limits<double>::quiet_NaN();
    double rmse = std::numeric_limits<double>::quiet_NaN();
};

struct TstrResult {
    std::vector<ModelScores> on_real;  // trained on the real train split
    std::vector<ModelScores> on_syn;   // trained on the synthetic table
};

namespace detail {

inline ModelScores score_classifier(const std::string& name, const TstrConfig& cfg,
                                    const RawTable& train_table, const FeaturePlan& plan,
                                    std::size_t target_idx, const std::map<std::string, int>& codes,
                                    std::size_t n_classes, const RawTable& test_table,
                                    const std::vector<int>& y_test) {
    ModelScores sc;
    sc.model = name;
    FeatureScaler scaler;
    const Matrix x_train = featurize(train_table, plan, nullptr, &scaler);
    const Matrix x_test = featurize(test_table, plan, &scaler, nullptr);
    const std::vector<int> y_train = encode_labels(train_table.cols[target_idx], codes);
    sc.degenerate =
        std::set<int>(y_train.begin(), y_train.end()).size() < 2;

    const std::unique_ptr<Classifier> model =
        make_classifier(name, cfg.logreg, cfg.tree, cfg.knn_k);
    model->fit(x_train, y_train, n_classes);
    const std::vector<int> pred = model->predict(x_test);
    sc.accuracy = accuracy(y_test, pred);
    sc.macro_f1 = macro_f1(y_test, pred);
    if (!sc.degenerate) {
        const Matrix proba = model->predict_proba(x_test);
        if (cfg.task == TaskKind::Binary && n_classes == 2) {
            std::vector<double> s(proba.rows);
            for (std::size_t i = 0; i < proba.rows; ++i) s[i] = proba(i, 1);
            sc.auroc = auroc_binary(y_test, s);
        } else {
            sc.auroc = auroc_macro_ovr(y_test, proba);
        }
    }
    return sc;
}

inline ModelScores score_regressor(const std::string& name, const TstrConfig& cfg,
                                   const RawTable& train_table, const FeaturePlan& plan,
                                   std::size_t target_idx, const RawTable& test_table,
                                   const std::vector<double>& y_test) {
    ModelScores sc;
    sc.model = name;
    if (train_table.cols[target_idx].text)
        throw ModelError("tstr: regression target '" + train_table.cols[target_idx].name +
                         "' is not numeric");
    FeatureScaler scaler;
    const Matrix x_train = featurize(train_table, plan, nullptr, &scaler);
    const Matrix x_test = featurize(test_table, plan, &scaler, nullptr);
    const std::vector<double>& y_train = train_table.cols[target_idx].nums;

    const std::unique_ptr<Regressor> model = make_regressor(name, cfg.tree);
    model->fit(x_train, y_train);
    const std::vector<double> pred = model->predict(x_test);
    sc.r2 = r2_score(y_test, pred);
    sc.rmse = rmse(y_test, pred);
    return sc;
}

}  // namespace detail

// Trains each model once on the real train split and once on the synthetic
// table, scoring both on the held-out real rows.
inline TstrResult tstr_evaluate(const RawTable& real, const RawTable& syn,
                                const std::string& target, const TstrConfig& cfg) {
    real.validate();
    syn.validate();
    const std::size_t target_idx = real.find_col(target);
    if (!syn.has_col(target)) throw ModelError("tstr: synthetic table lacks '" + target + "'");
    if (syn.cols.size() != real.cols.size())
        throw ModelError("tstr: column count mismatch between tables");
    for (std::size_t c = 0; c < real.cols.size(); ++c)
        if (syn.cols[c].name != real.cols[c].name)
            throw ModelError("tstr: column order differs at '" + syn.cols[c].name + "'");

    std::vector<std::size_t> train_idx, test_idx;
    tstr_split_indices(real.rows, cfg.split, cfg.seed, &train_idx, &test_idx);
    const RawTable real_train = take_table_rows(real, train_idx);
    const RawTable real_test = take_table_rows(real, test_idx);

    const detail::FeaturePlan plan =
        detail::make_feature_plan({&real, &syn}, target_idx);

    TstrResult out;
    if (cfg.task == TaskKind::Regression) {
        if (real.cols[target_idx].text)
            throw ModelError("tstr: regression target '" + target + "' is not numeric");
        const std::vector<double>& y_test = real_test.cols[target_idx].nums;
        for (const std::string& name : cfg.model_list()) {
            out.on_real.push_back(detail::score_regressor(name, cfg, real_train, plan, target_idx,
                                                          real_test, y_test));
            out.on_syn.push_back(detail::score_regressor(name, cfg, syn, plan, target_idx,
                                                         real_test, y_test));
        }
        return out;
    }

    std::map<std::string, int> codes;
    for (const RawTable* t : {&real, &syn})
        for (const std::string& k : detail::tstr_keys(t->cols[target_idx]))
            codes.emplace(k, static_cast<int>(codes.size()));
    const std::size_t n_classes = std::max<std::size_t>(codes.size(), 2);
    const std::vector<int> y_test = detail::encode_labels(real_test.cols[target_idx], codes);

    for (const std::string& name : cfg.model_list()) {
        out.on_real.push_back(detail::score_classifier(name, cfg, real_train, plan, target_idx,
                                                       codes, n_classes, real_test, y_test));
        out.on_syn.push_back(detail::score_classifier(name, cfg, syn, plan, target_idx, codes,
                                                      n_classes, real_test, y_test));
    }
    return out;
}

}  // namespace tabsynth
