#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <tabsynth/matrix.hpp>

namespace tabsynth {

struct ModelError : std::runtime_error {
    explicit ModelError(const std::string& msg) : std::runtime_error(msg) {}
};

// Downstream models for the train-on-synthetic protocol. All of them are
// deterministic: no sampling, ties broken by the lowest index.

class Classifier {
public:
    virtual ~Classifier() = default;
    virtual void fit(const Matrix& x, const std::vector<int>& y, std::size_t n_classes) = 0;
    // One simplex row per input row.
    virtual Matrix predict_proba(const Matrix& x) const = 0;

    std::vector<int> predict(const Matrix& x) const {
        const Matrix p = predict_proba(x);
        std::vector<int> out(p.rows, 0);
        for (std::size_t i = 0; i < p.rows; ++i) {
            std::size_t best = 0;
            for (std::size_t c = 1; c < p.cols; ++c)
                if (p(i, c) > p(i, best)) best = c;
            out[i] = static_cast<int>(best);
        }
        return out;
    }
};

class Regressor {
public:
    virtual ~Regressor() = default;
    virtual void fit(const Matrix& x, const std::vector<double>& y) = 0;
    virtual std::vector<double> predict(const Matrix& x) const = 0;
};

struct LogisticRegressionConfig {
    double lr = 0.5;
    std::size_t iters = 500;
    double l2 = 1e-4;
};

// Multinomial logistic regression, full-batch gradient descent from zero
// initialization. Binary targets are the K=2 case.
class LogisticRegression : public Classifier {
public:
    explicit LogisticRegression(LogisticRegressionConfig cfg = {}) : cfg_(cfg) {}

    void fit(const Matrix& x, const std::vector<int>& y, std::size_t n_classes) override {
        if (x.rows == 0 || x.rows != y.size()) throw ModelError("logistic: bad training shape");
        if (n_classes < 2) n_classes = 2;
        w_ = Matrix(x.cols, n_classes);
        b_.assign(n_classes, 0.0);
        const double inv_n = 1.0 / static_cast<double>(x.rows);
        for (std::size_t it = 0; it < cfg_.iters; ++it) {
            Matrix p = proba_(x);
            for (std::size_t i = 0; i < x.rows; ++i) p(i, static_cast<std::size_t>(y[i])) -= 1.0;
            Matrix gw = matmul_tn(x, p);
            scale_inplace(gw, inv_n);
            axpy(cfg_.l2, w_, gw);
            const std::vector<double> gb = col_sums(p);
            for (std::size_t j = 0; j < w_.data.size(); ++j) w_.data[j] -= cfg_.lr * gw.data[j];
            for (std::size_t c = 0; c < b_.size(); ++c) b_[c] -= cfg_.lr * gb[c] * inv_n;
        }
    }

    Matrix predict_proba(const Matrix& x) const override {
        if (w_.rows != x.cols) throw ModelError("logistic: predict before fit or width mismatch");
        return proba_(x);
    }

private:
    Matrix proba_(const Matrix& x) const {
        Matrix logits = matmul(x, w_);
        for (std::size_t i = 0; i < logits.rows; ++i) {
            double mx = -std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < logits.cols; ++c) {
                logits(i, c) += b_[c];
                mx = std::max(mx, logits(i, c));
            }
            double z = 0.0;
            for (std::size_t c = 0; c < logits.cols; ++c) {
                logits(i, c) = std::exp(logits(i, c) - mx);
                z += logits(i, c);
            }
            for (std::size_t c = 0; c < logits.cols; ++c) logits(i, c) /= z;
        }
        return logits;
    }

    LogisticRegressionConfig cfg_;
    Matrix w_;
    std::vector<double> b_;
};

struct TreeConfig {
    std::size_t max_depth = 6;
    std::size_t min_leaf = 1;
};

namespace detail {

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::size_t left = 0;
    std::size_t right = 0;
    std::vector<double> value;  // class distribution, or {mean} for regression
};

// CART splitter shared by the classifier and the regressor. Candidates are
// midpoints of consecutive distinct sorted values; the first strictly best
// (feature, threshold) pair wins, so training order never matters.
template <typename ImpurityFn>
inline bool best_split(const Matrix& x, const std::vector<std::size_t>& idx,
                       const TreeConfig& cfg, ImpurityFn&& weighted_impurity, int* out_feature,
                       double* out_threshold) {
    double best = std::numeric_limits<double>::infinity();
    bool found = false;
    std::vector<std::size_t> order;
    for (std::size_t f = 0; f < x.cols; ++f) {
        order = idx;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (x(a, f) != x(b, f)) return x(a, f) < x(b, f);
            return a < b;
        });
        for (std::size_t k = 0; k + 1 < order.size(); ++k) {
            if (x(order[k], f) == x(order[k + 1], f)) continue;
            const std::size_t n_left = k + 1;
            if (n_left < cfg.min_leaf || order.size() - n_left < cfg.min_leaf) continue;
            const double thr = 0.5 * (x(order[k], f) + x(order[k + 1], f));
            const double imp = weighted_impurity(order, n_left);
            if (imp < best) {
                best = imp;
                *out_feature = static_cast<int>(f);
                *out_threshold = thr;
                found = true;
            }
        }
    }
    return found;
}

}  // namespace detail

class DecisionTree : public Classifier {
public:
    explicit DecisionTree(TreeConfig cfg = {}) : cfg_(cfg) {}

    void fit(const Matrix& x, const std::vector<int>& y, std::size_t n_classes) override {
        if (x.rows == 0 || x.rows != y.size()) throw ModelError("tree: bad training shape");
        if (n_classes < 2) n_classes = 2;
        k_ = n_classes;
        nodes_.clear();
        std::vector<std::size_t> idx(x.rows);
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        build_(x, y, idx, 0);
    }

    Matrix predict_proba(const Matrix& x) const override {
        if (nodes_.empty()) throw ModelError("tree: predict before fit");
        Matrix p(x.rows, k_);
        for (std::size_t i = 0; i < x.rows; ++i) {
            std::size_t n = 0;
            while (nodes_[n].feature >= 0)
                n = x(i, static_cast<std::size_t>(nodes_[n].feature)) <= nodes_[n].threshold
                        ? nodes_[n].left
                        : nodes_[n].right;
            for (std::size_t c = 0; c < k_; ++c) p(i, c) = nodes_[n].value[c];
        }
        return p;
    }

private:
    std::vector<double> dist_(const std::vector<int>& y, const std::vector<std::size_t>& idx) const {
        std::vector<double> d(k_, 0.0);
        for (std::size_t i : idx) d[static_cast<std::size_t>(y[i])] += 1.0;
        for (double& v : d) v /= static_cast<double>(idx.size());
        return d;
    }

    static double gini_(const std::vector<double>& counts, double n) {
        double g = 1.0;
        for (double c : counts) g -= (c / n) * (c / n);
        return g;
    }

    std::size_t build_(const Matrix& x, const std::vector<int>& y,
                       const std::vector<std::size_t>& idx, std::size_t depth) {
        const std::size_t me = nodes_.size();
        nodes_.emplace_back();
        nodes_[me].value = dist_(y, idx);
        const bool pure =
            std::count(nodes_[me].value.begin(), nodes_[me].value.end(), 0.0) + 1 >=
            static_cast<long>(k_);
        if (depth >= cfg_.max_depth || pure || idx.size() < 2 * cfg_.min_leaf) return me;

        int feature = -1;
        double threshold = 0.0;
        std::vector<double> lc(k_), rc(k_);
        const auto impurity = [&](const std::vector<std::size_t>& order, std::size_t n_left) {
            std::fill(lc.begin(), lc.end(), 0.0);
            std::fill(rc.begin(), rc.end(), 0.0);
            for (std::size_t i = 0; i < order.size(); ++i)
                (i < n_left ? lc : rc)[static_cast<std::size_t>(y[order[i]])] += 1.0;
            const double nl = static_cast<double>(n_left);
            const double nr = static_cast<double>(order.size() - n_left);
            return nl * gini_(lc, nl) + nr * gini_(rc, nr);
        };
        if (!detail::best_split(x, idx, cfg_, impurity, &feature, &threshold)) return me;

        std::vector<std::size_t> li, ri;
        for (std::size_t i : idx)
            (x(i, static_cast<std::size_t>(feature)) <= threshold ? li : ri).push_back(i);
        nodes_[me].feature = feature;
        nodes_[me].threshold = threshold;
        const std::size_t l = build_(x, y, li, depth + 1);
        const std::size_t r = build_(x, y, ri, depth + 1);
        nodes_[me].left = l;
        nodes_[me].right = r;
        return me;
    }

    TreeConfig cfg_;
    std::size_t k_ = 0;
    std::vector<detail::TreeNode> nodes_;
};

class TreeRegressor : public Regressor {
public:
    explicit TreeRegressor(TreeConfig cfg = {}) : cfg_(cfg) {}

    void fit(const Matrix& x, const std::vector<double>& y) override {
        if (x.rows == 0 || x.rows != y.size()) throw ModelError("tree: bad training shape");
        nodes_.clear();
        std::vector<std::size_t> idx(x.rows);
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        build_(x, y, idx, 0);
    }

    std::vector<double> predict(const Matrix& x) const override {
        if (nodes_.empty()) throw ModelError("tree: predict before fit");
        std::vector<double> out(x.rows, 0.0);
        for (std::size_t i = 0; i < x.rows; ++i) {
            std::size_t n = 0;
            while (nodes_[n].feature >= 0)
                n = x(i, static_cast<std::size_t>(nodes_[n].feature)) <= nodes_[n].threshold
                        ? nodes_[n].left
                        : nodes_[n].right;
            out[i] = nodes_[n].value[0];
        }
        return out;
    }

private:
    std::size_t build_(const Matrix& x, const std::vector<double>& y,
                       const std::vector<std::size_t>& idx, std::size_t depth) {
        const std::size_t me = nodes_.size();
        nodes_.emplace_back();
        double mean = 0.0;
        for (std::size_t i : idx) mean += y[i];
        mean /= static_cast<double>(idx.size());
        nodes_[me].value = {mean};
        double ss = 0.0;
        for (std::size_t i : idx) ss += (y[i] - mean) * (y[i] - mean);
        if (depth >= cfg_.max_depth || ss <= 0.0 || idx.size() < 2 * cfg_.min_leaf) return me;

        int feature = -1;
        double threshold = 0.0;
        const auto impurity = [&](const std::vector<std::size_t>& order, std::size_t n_left) {
            double sl = 0.0, sr = 0.0;
            for (std::size_t i = 0; i < order.size(); ++i) (i < n_left ? sl : sr) += y[order[i]];
            const double nl = static_cast<double>(n_left);
            const double nr = static_cast<double>(order.size() - n_left);
            double vl = 0.0, vr = 0.0;
            for (std::size_t i = 0; i < order.size(); ++i) {
                const double m = i < n_left ? sl / nl : sr / nr;
                const double d = y[order[i]] - m;
                (i < n_left ? vl : vr) += d * d;
            }
            return vl + vr;
        };
        if (!detail::best_split(x, idx, cfg_, impurity, &feature, &threshold)) return me;

        std::vector<std::size_t> li, ri;
        for (std::size_t i : idx)
            (x(i, static_cast<std::size_t>(feature)) <= threshold ? li : ri).push_back(i);
        nodes_[me].feature = feature;
        nodes_[me].threshold = threshold;
        const std::size_t l = build_(x, y, li, depth + 1);
        const std::size_t r = build_(x, y, ri, depth + 1);
        nodes_[me].left = l;
        nodes_[me].right = r;
        return me;
    }

    TreeConfig cfg_;
    std::vector<detail::TreeNode> nodes_;
};

// k nearest neighbours by Euclidean distance; equal distances favour the
// earlier training row, vote ties the smaller class.
class Knn : public Classifier {
public:
    explicit Knn(std::size_t k = 5) : k_(k) {
        if (k_ == 0) throw ModelError("knn: k must be positive");
    }

    void fit(const Matrix& x, const std::vector<int>& y, std::size_t n_classes) override {
        if (x.rows == 0 || x.rows != y.size()) throw ModelError("knn: bad training shape");
        x_ = x;
        y_ = y;
        nc_ = std::max<std::size_t>(n_classes, 2);
    }

    Matrix predict_proba(const Matrix& x) const override {
        if (x_.rows == 0) throw ModelError("knn: predict before fit");
        const std::size_t k = std::min(k_, x_.rows);
        Matrix p(x.rows, nc_);
        std::vector<std::pair<double, std::size_t>> dist(x_.rows);
        for (std::size_t i = 0; i < x.rows; ++i) {
            for (std::size_t j = 0; j < x_.rows; ++j) {
                double s = 0.0;
                for (std::size_t c = 0; c < x.cols; ++c) {
                    const double d = x(i, c) - x_(j, c);
                    s += d * d;
                }
                dist[j] = {s, j};
            }
            std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k),
                              dist.end());
            for (std::size_t t = 0; t < k; ++t)
                p(i, static_cast<std::size_t>(y_[dist[t].second])) += 1.0 / static_cast<double>(k);
        }
        return p;
    }

private:
    std::size_t k_;
    std::size_t nc_ = 2;
    Matrix x_;
    std::vector<int> y_;
};

namespace detail {

// Gaussian elimination with partial pivoting; the caller owns fallback
// regularization when the system is singular.
inline bool solve_linear(Matrix a, std::vector<double> b, std::vector<double>* out) {
    const std::size_t n = a.rows;
    if (a.cols != n || b.size() != n) throw ModelError("solve_linear: shape mismatch");
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
        if (std::abs(a(piv, c)) < 1e-12) return false;
        if (piv != c) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(c, j), a(piv, j));
            std::swap(b[c], b[piv]);
        }
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = a(r, c) / a(c, c);
            if (f == 0.0) continue;
            for (std::size_t j = c; j < n; ++j) a(r, j) -= f * a(c, j);
            b[r] -= f * b[c];
        }
    }
    out->assign(n, 0.0);
    for (std::size_t c = n; c-- > 0;) {
        double s = b[c];
        for (std::size_t j = c + 1; j < n; ++j) s -= a(c, j) * (*out)[j];
        (*out)[c] = s / a(c, c);
    }
    return true;
}

}  // namespace detail

// Ordinary least squares with intercept; singular normal equations fall back
// to a tiny ridge term.
class LinearRegression : public Regressor {
public:
    void fit(const Matrix& x, const std::vector<double>& y) override {
        if (x.rows == 0 || x.rows != y.size()) throw ModelError("ols: bad training shape");
        const std::size_t d = x.cols + 1;
        Matrix xtx(d, d);
        std::vector<double> xty(d, 0.0);
        for (std::size_t i = 0; i < x.rows; ++i) {
            for (std::size_t a = 0; a < d; ++a) {
                const double va = a < x.cols ? x(i, a) : 1.0;
                xty[a] += va * y[i];
                for (std::size_t b = a; b < d; ++b) {
                    const double vb = b < x.cols ? x(i, b) : 1.0;
                    xtx(a, b) += va * vb;
                }
            }
        }
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = 0; b < a; ++b) xtx(a, b) = xtx(b, a);
        if (!detail::solve_linear(xtx, xty, &beta_)) {
            for (std::size_t a = 0; a < d; ++a) xtx(a, a) += 1e-8;
            if (!detail::solve_linear(xtx, xty, &beta_))
                throw ModelError("ols: singular normal equations");
        }
    }

    std::vector<double> predict(const Matrix& x) const override {
        if (beta_.size() != x.cols + 1) throw ModelError("ols: predict before fit");
        std::vector<double> out(x.rows, beta_.back());
        for (std::size_t i = 0; i < x.rows; ++i)
            for (std::size_t c = 0; c < x.cols; ++c) out[i] += beta_[c] * x(i, c);
        return out;
    }

private:
    std::vector<double> beta_;
};

inline std::unique_ptr<Classifier> make_classifier(const std::string& name,
                                                   const LogisticRegressionConfig& lr,
                                                   const TreeConfig& tree, std::size_t knn_k) {
    if (name == "logistic_regression") return std::make_unique<LogisticRegression>(lr);
    if (name == "decision_tree") return std::make_unique<DecisionTree>(tree);
    if (name == "knn") return std::make_unique<Knn>(knn_k);
    throw ModelError("unknown classifier '" + name + "'");
}

inline std::unique_ptr<Regressor> make_regressor(const std::string& name,
                                                 const TreeConfig& tree) {
    if (name == "linear_regression") return std::make_unique<LinearRegression>();
    if (name == "tree_regressor") return std::make_unique<TreeRegressor>(tree);
    throw ModelError("unknown regressor '" + name + "'");
}

}  // namespace tabsynth
