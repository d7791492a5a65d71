#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <tabsynth/csv.hpp>
#include <tabsynth/matrix.hpp>
#include <tabsynth/schema.hpp>
#include <tabsynth/table.hpp>

namespace tabsynth {

struct MetricError : std::runtime_error {
    explicit MetricError(const std::string& msg) : std::runtime_error(msg) {}
};

// W1 between the empirical distributions of two samples, computed exactly as
// the integral of |F_a - F_b|. With normalize set, both samples are rescaled
// by min/range of `real` so per-column values are comparable across scales.
inline double wasserstein_1d(std::vector<double> real, std::vector<double> syn,
                             bool normalize = true) {
    if (real.empty() || syn.empty()) throw MetricError("wasserstein_1d: empty sample");
    if (normalize) {
        auto [mn, mx] = std::minmax_element(real.begin(), real.end());
        const double lo = *mn;
        double range = *mx - *mn;
        if (range <= 0.0) range = 1.0;
        for (double& v : real) v = (v - lo) / range;
        for (double& v : syn) v = (v - lo) / range;
    }
    std::sort(real.begin(), real.end());
    std::sort(syn.begin(), syn.end());
    std::vector<double> all;
    all.reserve(real.size() + syn.size());
    all.insert(all.end(), real.begin(), real.end());
    all.insert(all.end(), syn.begin(), syn.end());
    std::sort(all.begin(), all.end());

    const double na = static_cast<double>(real.size());
    const double nb = static_cast<double>(syn.size());
    double w = 0.0;
    std::size_t ia = 0, ib = 0;
    for (std::size_t k = 0; k + 1 < all.size(); ++k) {
        while (ia < real.size() && real[ia] <= all[k]) ++ia;
        while (ib < syn.size() && syn[ib] <= all[k]) ++ib;
        w += std::abs(static_cast<double>(ia) / na - static_cast<double>(ib) / nb) *
             (all[k + 1] - all[k]);
    }
    return w;
}

namespace detail {

inline std::map<std::string, double> key_freq(const std::vector<std::string>& keys) {
    std::map<std::string, double> f;
    for (const std::string& k : keys) f[k] += 1.0;
    for (auto& [k, v] : f) v /= static_cast<double>(keys.size());
    return f;
}

inline double entropy_nat(const std::map<std::string, double>& freq) {
    double h = 0.0;
    for (const auto& [k, p] : freq)
        if (p > 0.0) h -= p * std::log(p);
    return h;
}

}  // namespace detail

// Jensen-Shannon divergence over the union support, log base 2 so the value
// lives in [0,1].
inline double js_divergence(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    if (a.empty() || b.empty()) throw MetricError("js_divergence: empty sample");
    const auto pa = detail::key_freq(a);
    const auto pb = detail::key_freq(b);
    std::map<std::string, std::pair<double, double>> sup;
    for (const auto& [k, v] : pa) sup[k].first = v;
    for (const auto& [k, v] : pb) sup[k].second = v;
    double js = 0.0;
    for (const auto& [k, pq] : sup) {
        const double m = 0.5 * (pq.first + pq.second);
        if (pq.first > 0.0) js += 0.5 * pq.first * std::log2(pq.first / m);
        if (pq.second > 0.0) js += 0.5 * pq.second * std::log2(pq.second / m);
    }
    return std::clamp(js, 0.0, 1.0);
}

// Categorical key view of a raw column; numeric columns use the shortest
// round-trip decimal form so equal values share a key.
inline std::vector<std::string> column_keys(const Column& c) {
    if (c.text) return c.texts;
    std::vector<std::string> out(c.nums.size());
    for (std::size_t i = 0; i < c.nums.size(); ++i) out[i] = format_double(c.nums[i]);
    return out;
}

// Pearson on raw columns. Constant columns get zero off-diagonal entries and
// keep the unit diagonal.
inline Matrix pearson_matrix(const std::vector<std::vector<double>>& cols) {
    const std::size_t k = cols.size();
    Matrix r(k, k);
    if (k == 0) return r;
    const std::size_t n = cols[0].size();
    if (n < 2) throw MetricError("pearson_matrix: need at least 2 rows");
    for (const auto& c : cols)
        if (c.size() != n) throw MetricError("pearson_matrix: ragged input");

    std::vector<double> mean(k, 0.0), sd(k, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        for (double v : cols[i]) mean[i] += v;
        mean[i] /= static_cast<double>(n);
        for (double v : cols[i]) sd[i] += (v - mean[i]) * (v - mean[i]);
        sd[i] = std::sqrt(sd[i]);
    }
    for (std::size_t i = 0; i < k; ++i) {
        r(i, i) = 1.0;
        for (std::size_t j = i + 1; j < k; ++j) {
            double v = 0.0;
            if (sd[i] > 0.0 && sd[j] > 0.0) {
                double cov = 0.0;
                for (std::size_t t = 0; t < n; ++t)
                    cov += (cols[i][t] - mean[i]) * (cols[j][t] - mean[j]);
                v = std::clamp(cov / (sd[i] * sd[j]), -1.0, 1.0);
            }
            r(i, j) = v;
            r(j, i) = v;
        }
    }
    return r;
}

// Uncertainty coefficient U(X|Y) = (H(X) - H(X|Y)) / H(X) with natural logs.
// A constant X carries no uncertainty, so U is 1 by convention.
inline double theils_u(const std::vector<std::string>& x, const std::vector<std::string>& y) {
    if (x.size() != y.size() || x.empty()) throw MetricError("theils_u: size mismatch");
    const double n = static_cast<double>(x.size());
    const double hx = detail::entropy_nat(detail::key_freq(x));
    if (hx <= 0.0) return 1.0;

    std::map<std::string, std::map<std::string, double>> by_y;
    for (std::size_t i = 0; i < x.size(); ++i) by_y[y[i]][x[i]] += 1.0;
    double hxy = 0.0;
    for (auto& [yk, counts] : by_y) {
        double ny = 0.0;
        for (const auto& [xk, c] : counts) ny += c;
        for (auto& [xk, c] : counts) c /= ny;
        hxy += (ny / n) * detail::entropy_nat(counts);
    }
    return std::clamp((hx - hxy) / hx, 0.0, 1.0);
}

// Entry (i, j) = U(X_i | X_j).
inline Matrix theils_u_matrix(const std::vector<std::vector<std::string>>& cols) {
    const std::size_t k = cols.size();
    Matrix u(k, k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) u(i, j) = theils_u(cols[i], cols[j]);
    return u;
}

// Correlation ratio eta: share of the numerical variance explained by the
// category means. A constant numerical column has no variance to explain.
inline double correlation_ratio(const std::vector<std::string>& cat,
                                const std::vector<double>& num) {
    if (cat.size() != num.size() || cat.empty())
        throw MetricError("correlation_ratio: size mismatch");
    double mean = 0.0;
    for (double v : num) mean += v;
    mean /= static_cast<double>(num.size());

    std::map<std::string, std::pair<double, double>> groups;  // sum, count
    for (std::size_t i = 0; i < num.size(); ++i) {
        groups[cat[i]].first += num[i];
        groups[cat[i]].second += 1.0;
    }
    double ss_between = 0.0;
    for (const auto& [k, sc] : groups) {
        const double gm = sc.first / sc.second;
        ss_between += sc.second * (gm - mean) * (gm - mean);
    }
    double ss_total = 0.0;
    for (double v : num) ss_total += (v - mean) * (v - mean);
    if (ss_total <= 0.0) return 0.0;
    return std::sqrt(std::clamp(ss_between / ss_total, 0.0, 1.0));
}

// Rows are categorical columns, columns numerical ones.
inline Matrix correlation_ratio_matrix(const std::vector<std::vector<std::string>>& cats,
                                       const std::vector<std::vector<double>>& nums) {
    Matrix m(cats.size(), nums.size());
    for (std::size_t i = 0; i < cats.size(); ++i)
        for (std::size_t j = 0; j < nums.size(); ++j)
            m(i, j) = correlation_ratio(cats[i], nums[j]);
    return m;
}

struct CorrelationMatrices {
    Matrix pearson;
    Matrix theils;
    Matrix ratio;
};

// Columns of a raw table grouped by schema kind; mixed numericals count as
// numerical since their raw values are.
struct KindColumns {
    std::vector<std::string> num_names;
    std::vector<std::string> cat_names;
    std::vector<std::vector<double>> num_vals;
    std::vector<std::vector<std::string>> cat_keys;
};

inline KindColumns kind_columns(const RawTable& t, const TableSchema& schema) {
    KindColumns out;
    for (const ColumnSchema& cs : schema.cols) {
        if (!t.has_col(cs.name)) throw MetricError("kind_columns: missing column '" + cs.name + "'");
        const Column& col = t.cols[t.find_col(cs.name)];
        if (cs.kind == FeatureKind::Numerical || cs.kind == FeatureKind::MixedNumerical) {
            if (col.text)
                throw MetricError("kind_columns: column '" + cs.name + "' is not numeric");
            out.num_names.push_back(cs.name);
            out.num_vals.push_back(col.nums);
        } else {
            out.cat_names.push_back(cs.name);
            out.cat_keys.push_back(column_keys(col));
        }
    }
    return out;
}

inline CorrelationMatrices correlation_matrices(const RawTable& t, const TableSchema& schema) {
    const KindColumns kc = kind_columns(t, schema);
    CorrelationMatrices m;
    m.pearson = pearson_matrix(kc.num_vals);
    m.theils = theils_u_matrix(kc.cat_keys);
    m.ratio = correlation_ratio_matrix(kc.cat_keys, kc.num_vals);
    return m;
}

struct CorrDiffs {
    double pearson = 0.0;
    double theils = 0.0;
    double ratio = 0.0;
};

namespace detail {

inline double frob_diff(const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows || a.cols != b.cols)
        throw MetricError("corr_l2_diff: shape mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace detail

inline CorrDiffs corr_l2_diff(const CorrelationMatrices& real, const CorrelationMatrices& syn) {
    CorrDiffs d;
    d.pearson = detail::frob_diff(real.pearson, syn.pearson);
    d.theils = detail::frob_diff(real.theils, syn.theils);
    d.ratio = detail::frob_diff(real.ratio, syn.ratio);
    return d;
}

namespace detail {

// Point embedding for DCR: raw numerical values plus unscaled one-hot
// categoricals over the union of categories seen in either table. With
// normalize set, numericals are divided by the real column's range first.
struct DcrEmbedding {
    std::vector<std::vector<double>> real_rows;
    std::vector<std::vector<double>> syn_rows;
};

inline DcrEmbedding dcr_embed(const RawTable& real, const RawTable& syn,
                              const TableSchema& schema, bool normalize) {
    const KindColumns kr = kind_columns(real, schema);
    const KindColumns ks = kind_columns(syn, schema);
    DcrEmbedding e;
    e.real_rows.assign(real.rows, {});
    e.syn_rows.assign(syn.rows, {});

    for (std::size_t c = 0; c < kr.num_vals.size(); ++c) {
        double scale = 1.0;
        if (normalize) {
            auto [mn, mx] = std::minmax_element(kr.num_vals[c].begin(), kr.num_vals[c].end());
            if (*mx - *mn > 0.0) scale = *mx - *mn;
        }
        for (std::size_t i = 0; i < real.rows; ++i)
            e.real_rows[i].push_back(kr.num_vals[c][i] / scale);
        for (std::size_t i = 0; i < syn.rows; ++i)
            e.syn_rows[i].push_back(ks.num_vals[c][i] / scale);
    }
    for (std::size_t c = 0; c < kr.cat_keys.size(); ++c) {
        std::map<std::string, std::size_t> slot;
        for (const std::string& k : kr.cat_keys[c]) slot.emplace(k, slot.size());
        for (const std::string& k : ks.cat_keys[c]) slot.emplace(k, slot.size());
        const std::size_t width = slot.size();
        for (std::size_t i = 0; i < real.rows; ++i) {
            std::vector<double> oh(width, 0.0);
            oh[slot[kr.cat_keys[c][i]]] = 1.0;
            e.real_rows[i].insert(e.real_rows[i].end(), oh.begin(), oh.end());
        }
        for (std::size_t i = 0; i < syn.rows; ++i) {
            std::vector<double> oh(width, 0.0);
            oh[slot[ks.cat_keys[c][i]]] = 1.0;
            e.syn_rows[i].insert(e.syn_rows[i].end(), oh.begin(), oh.end());
        }
    }
    return e;
}

}  // namespace detail

// Distance to the closest real record, one value per synthetic row.
inline std::vector<double> dcr(const RawTable& real, const RawTable& syn,
                               const TableSchema& schema, bool normalize = false) {
    if (real.rows == 0 || syn.rows == 0) throw MetricError("dcr: empty table");
    const detail::DcrEmbedding e = detail::dcr_embed(real, syn, schema, normalize);
    std::vector<double> out(syn.rows, 0.0);
    for (std::size_t i = 0; i < syn.rows; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < real.rows; ++j) {
            double s = 0.0;
            const auto& a = e.syn_rows[i];
            const auto& b = e.real_rows[j];
            for (std::size_t c = 0; c < a.size(); ++c) {
                const double d = a[c] - b[c];
                s += d * d;
            }
            best = std::min(best, s);
        }
        out[i] = std::sqrt(best);
    }
    return out;
}

inline double mean_dcr(const RawTable& real, const RawTable& syn, const TableSchema& schema,
                       bool normalize = false) {
    const std::vector<double> d = dcr(real, syn, schema, normalize);
    double s = 0.0;
    for (double v : d) s += v;
    return s / static_cast<double>(d.size());
}

enum class RankDirection { LowerBetter, HigherBetter };

// Average rank per model over datasets. scores(i, j) is model i on dataset j;
// NaN marks a missing cell. Ties share the mean of the tied positions.
inline std::vector<double> rank_aggregate(const Matrix& scores, RankDirection dir) {
    if (scores.rows == 0 || scores.cols == 0) throw MetricError("rank_aggregate: empty matrix");
    std::string missing;
    for (std::size_t i = 0; i < scores.rows; ++i)
        for (std::size_t j = 0; j < scores.cols; ++j)
            if (!std::isfinite(scores(i, j)))
                missing += " (model " + std::to_string(i) + ", dataset " + std::to_string(j) + ")";
    if (!missing.empty()) throw MetricError("rank_aggregate: missing cells:" + missing);

    std::vector<double> avg(scores.rows, 0.0);
    for (std::size_t j = 0; j < scores.cols; ++j) {
        std::vector<std::size_t> order(scores.rows);
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const double sa = scores(a, j), sb = scores(b, j);
            if (sa != sb) return dir == RankDirection::LowerBetter ? sa < sb : sa > sb;
            return a < b;
        });
        std::size_t k = 0;
        while (k < order.size()) {
            std::size_t e = k;
            while (e + 1 < order.size() && scores(order[e + 1], j) == scores(order[k], j)) ++e;
            const double rank = 0.5 * static_cast<double>(k + e) + 1.0;
            for (std::size_t t = k; t <= e; ++t) avg[order[t]] += rank;
            k = e + 1;
        }
    }
    for (double& v : avg) v /= static_cast<double>(scores.cols);
    return avg;
}

// Labeled matrix grid as CSV: header row of column labels, first cell per row
// the row label.
inline void write_matrix_csv(const std::string& path, const Matrix& m,
                             const std::vector<std::string>& row_labels,
                             const std::vector<std::string>& col_labels) {
    if (row_labels.size() != m.rows || col_labels.size() != m.cols)
        throw MetricError("write_matrix_csv: label count mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw MetricError("write_matrix_csv: cannot open '" + path + "'");
    for (const std::string& c : col_labels) {
        out << ',';
        detail::write_csv_field(out, c);
    }
    out << '\n';
    for (std::size_t i = 0; i < m.rows; ++i) {
        detail::write_csv_field(out, row_labels[i]);
        for (std::size_t j = 0; j < m.cols; ++j) out << ',' << format_double(m(i, j));
        out << '\n';
    }
}

// Writes real, synthetic and difference grids for all three matrix kinds.
inline void heatmap_export(const std::string& dir, const CorrelationMatrices& real,
                           const CorrelationMatrices& syn,
                           const std::vector<std::string>& num_names,
                           const std::vector<std::string>& cat_names) {
    std::filesystem::create_directories(dir);
    const auto diff = [](const Matrix& a, const Matrix& b) {
        if (a.rows != b.rows || a.cols != b.cols)
            throw MetricError("heatmap_export: shape mismatch");
        Matrix d(a.rows, a.cols);
        for (std::size_t i = 0; i < a.data.size(); ++i) d.data[i] = a.data[i] - b.data[i];
        return d;
    };
    const auto emit = [&](const std::string& stem, const Matrix& r, const Matrix& s,
                          const std::vector<std::string>& rl, const std::vector<std::string>& cl) {
        write_matrix_csv(dir + "/" + stem + "_real.csv", r, rl, cl);
        write_matrix_csv(dir + "/" + stem + "_synthetic.csv", s, rl, cl);
        write_matrix_csv(dir + "/" + stem + "_diff.csv", diff(r, s), rl, cl);
    };
    emit("pearson", real.pearson, syn.pearson, num_names, num_names);
    emit("theils_u", real.theils, syn.theils, cat_names, cat_names);
    emit("correlation_ratio", real.ratio, syn.ratio, cat_names, num_names);
}

}  // namespace tabsynth
