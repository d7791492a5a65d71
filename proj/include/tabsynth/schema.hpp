#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tabsynth/matrix.hpp"
#include "tabsynth/table.hpp"

namespace tabsynth {

struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Wichura's AS241 rational approximation, good to ~1e-15 on (0,1).
inline double norm_ppf(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("norm_ppf: p outside (0,1)");
    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        const double num =
            (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                  6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
              1.3314166789178437745e2) * r + 3.3871328727963666080e0);
        const double den =
            (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                  3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
              4.2313330701600911252e1) * r + 1.0);
        return q * num / den;
    }
    double r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double x;
    if (r <= 5.0) {
        r -= 1.6;
        const double num =
            (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
              4.63033784615654529590e0) * r + 1.42343711074968357734e0);
        const double den =
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
              2.05319162663775882187e0) * r + 1.0);
        x = num / den;
    } else {
        r -= 5.0;
        const double num =
            (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
              5.46378491116411436990e0) * r + 6.65790464350110377720e0);
        const double den =
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
        x = num / den;
    }
    return (q < 0.0) ? -x : x;
}

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

enum class ScalerKind { MinMax, QuantileGauss };

inline const char* scaler_name(ScalerKind k) {
    return k == ScalerKind::MinMax ? "minmax" : "quantile_gauss";
}

inline ScalerKind scaler_from_name(const std::string& s) {
    if (s == "minmax") return ScalerKind::MinMax;
    if (s == "quantile_gauss") return ScalerKind::QuantileGauss;
    throw SchemaError("unknown scaler kind '" + s + "'");
}

// Per-column numerical transform. Quantile state keeps the unique training
// values as knots with mid-rank levels; ys are derived and never persisted.
struct NumScaler {
    ScalerKind kind = ScalerKind::MinMax;
    double mn = 0.0, mx = 0.0;
    std::vector<double> knots;
    std::vector<double> levels;
    std::vector<double> ys;

    static constexpr double kCdfClip = 1e-7;

    void finalize() {
        if (kind != ScalerKind::QuantileGauss) return;
        ys.resize(levels.size());
        for (std::size_t i = 0; i < levels.size(); ++i)
            ys[i] = norm_ppf(std::clamp(levels[i], kCdfClip, 1.0 - kCdfClip));
    }

    static NumScaler fit_minmax(const std::vector<double>& col) {
        if (col.empty()) throw SchemaError("fit_minmax: empty column");
        NumScaler s;
        s.kind = ScalerKind::MinMax;
        s.mn = *std::min_element(col.begin(), col.end());
        s.mx = *std::max_element(col.begin(), col.end());
        return s;
    }

    static NumScaler fit_quantile(const std::vector<double>& col, std::size_t n_quantiles) {
        if (col.size() < 2) throw SchemaError("fit_quantile: need at least 2 values");
        if (n_quantiles < 2) throw SchemaError("fit_quantile: n_quantiles must be >= 2");
        std::vector<double> sorted = col;
        std::sort(sorted.begin(), sorted.end());
        const double denom = static_cast<double>(sorted.size() - 1);
        NumScaler s;
        s.kind = ScalerKind::QuantileGauss;
        std::size_t i = 0;
        while (i < sorted.size()) {
            std::size_t j = i;
            while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
            s.knots.push_back(sorted[i]);
            s.levels.push_back((static_cast<double>(i) + static_cast<double>(j)) / (2.0 * denom));
            i = j + 1;
        }
        if (s.knots.size() > n_quantiles) {
            std::vector<double> k2, l2;
            k2.reserve(n_quantiles);
            l2.reserve(n_quantiles);
            const std::size_t m = s.knots.size();
            for (std::size_t q = 0; q < n_quantiles; ++q) {
                const std::size_t pick = static_cast<std::size_t>(std::llround(
                    static_cast<double>(q) * static_cast<double>(m - 1) /
                    static_cast<double>(n_quantiles - 1)));
                if (!k2.empty() && k2.back() == s.knots[pick]) continue;
                k2.push_back(s.knots[pick]);
                l2.push_back(s.levels[pick]);
            }
            s.knots = std::move(k2);
            s.levels = std::move(l2);
        }
        s.finalize();
        return s;
    }

    double lo() const {
        if (kind == ScalerKind::MinMax) return 0.0;
        return ys.front();
    }
    double hi() const {
        if (kind == ScalerKind::MinMax) return mn == mx ? 0.0 : 1.0;
        return ys.back();
    }

    double apply(double x) const {
        if (kind == ScalerKind::MinMax) {
            if (mn == mx) return 0.0;
            return std::clamp((x - mn) / (mx - mn), 0.0, 1.0);
        }
        if (knots.size() == 1) return ys[0];
        if (x <= knots.front()) return ys.front();
        if (x >= knots.back()) return ys.back();
        const auto it = std::lower_bound(knots.begin(), knots.end(), x);
        const std::size_t j = static_cast<std::size_t>(it - knots.begin());
        if (knots[j] == x) return ys[j];
        const double pl = std::clamp(levels[j - 1], kCdfClip, 1.0 - kCdfClip);
        const double ph = std::clamp(levels[j], kCdfClip, 1.0 - kCdfClip);
        const double t = (x - knots[j - 1]) / (knots[j] - knots[j - 1]);
        return norm_ppf(pl + t * (ph - pl));
    }

    // Piecewise-linear in y so training knots come back bit-exact.
    double invert(double y) const {
        if (kind == ScalerKind::MinMax) return mn + y * (mx - mn);
        if (knots.size() == 1 || y <= ys.front()) return knots.front();
        if (y >= ys.back()) return knots.back();
        const auto it = std::upper_bound(ys.begin(), ys.end(), y);
        const std::size_t j = static_cast<std::size_t>(it - ys.begin()) - 1;
        const double dy = ys[j + 1] - ys[j];
        if (dy == 0.0) return knots[j];
        const double t = (y - ys[j]) / dy;
        return knots[j] + t * (knots[j + 1] - knots[j]);
    }
};

enum class FeatureKind { Numerical, Binary, Categorical, MixedNumerical };

inline const char* kind_name(FeatureKind k) {
    switch (k) {
        case FeatureKind::Numerical: return "numerical";
        case FeatureKind::Binary: return "binary";
        case FeatureKind::Categorical: return "categorical";
        case FeatureKind::MixedNumerical: return "mixed";
    }
    throw std::logic_error("kind_name: bad kind");
}

inline FeatureKind kind_from_name(const std::string& s) {
    if (s == "numerical") return FeatureKind::Numerical;
    if (s == "binary") return FeatureKind::Binary;
    if (s == "categorical") return FeatureKind::Categorical;
    if (s == "mixed") return FeatureKind::MixedNumerical;
    throw SchemaError("unknown feature kind '" + s + "'");
}

struct ColumnSchema {
    std::string name;
    FeatureKind kind = FeatureKind::Numerical;
    bool text = false;
    bool integer = false;
    std::vector<std::string> labels_text;
    std::vector<double> labels_num;
    NumScaler scaler;
    std::vector<double> repeated;

    std::size_t cardinality() const {
        if (kind == FeatureKind::MixedNumerical) return repeated.size() + 1;
        return text ? labels_text.size() : labels_num.size();
    }
};

struct SchemaOptions {
    std::size_t distinct_threshold = 25;
    double h_percent = 1.0;
    ScalerKind scaler = ScalerKind::MinMax;
    std::size_t n_quantiles = 1000;
};

// x^Proc column order: numerical block (incl. mixed numeric parts), binary
// block, categorical block (plain categoricals first, then mixed dummies).
struct BlockLayout {
    std::vector<std::size_t> num_cols;
    std::vector<std::size_t> bin_cols;
    std::vector<std::size_t> cat_cols;
    std::vector<std::size_t> cat_cards;

    std::size_t num_width() const { return num_cols.size(); }
    std::size_t bin_width() const { return bin_cols.size(); }
    std::size_t cat_width() const { return cat_cols.size(); }
    std::size_t bin_off() const { return num_cols.size(); }
    std::size_t cat_off() const { return num_cols.size() + bin_cols.size(); }
    std::size_t width() const { return num_cols.size() + bin_cols.size() + cat_cols.size(); }
};

struct TableSchema {
    SchemaOptions opts;
    std::vector<ColumnSchema> cols;

    BlockLayout layout() const {
        BlockLayout l;
        for (std::size_t i = 0; i < cols.size(); ++i)
            if (cols[i].kind == FeatureKind::Numerical ||
                cols[i].kind == FeatureKind::MixedNumerical)
                l.num_cols.push_back(i);
        for (std::size_t i = 0; i < cols.size(); ++i)
            if (cols[i].kind == FeatureKind::Binary) l.bin_cols.push_back(i);
        for (std::size_t i = 0; i < cols.size(); ++i)
            if (cols[i].kind == FeatureKind::Categorical) {
                l.cat_cols.push_back(i);
                l.cat_cards.push_back(cols[i].cardinality());
            }
        for (std::size_t i = 0; i < cols.size(); ++i)
            if (cols[i].kind == FeatureKind::MixedNumerical) {
                l.cat_cols.push_back(i);
                l.cat_cards.push_back(cols[i].cardinality());
            }
        return l;
    }
};

namespace detail {

inline bool all_integer(const std::vector<double>& v) {
    for (double x : v)
        if (std::floor(x) != x || std::fabs(x) > 9.007199254740992e15) return false;
    return true;
}

}  // namespace detail

inline TableSchema infer_schema(const RawTable& table, SchemaOptions opts = {}) {
    table.validate();
    if (table.rows == 0 || table.cols.empty()) throw SchemaError("infer_schema: empty table");
    TableSchema schema;
    schema.opts = opts;
    const double repeat_cut = opts.h_percent / 100.0 * static_cast<double>(table.rows);
    for (const auto& col : table.cols) {
        ColumnSchema cs;
        cs.name = col.name;
        if (col.text) {
            cs.text = true;
            cs.labels_text = col.texts;
            std::sort(cs.labels_text.begin(), cs.labels_text.end());
            cs.labels_text.erase(std::unique(cs.labels_text.begin(), cs.labels_text.end()),
                                 cs.labels_text.end());
            cs.kind = cs.labels_text.size() == 2 ? FeatureKind::Binary : FeatureKind::Categorical;
            schema.cols.push_back(std::move(cs));
            continue;
        }
        std::vector<double> sorted = col.nums;
        std::sort(sorted.begin(), sorted.end());
        std::vector<double> distinct = sorted;
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        cs.integer = detail::all_integer(col.nums);
        if (cs.integer && distinct.size() <= opts.distinct_threshold) {
            cs.labels_num = std::move(distinct);
            cs.kind = cs.labels_num.size() == 2 ? FeatureKind::Binary : FeatureKind::Categorical;
            schema.cols.push_back(std::move(cs));
            continue;
        }
        cs.kind = FeatureKind::Numerical;
        struct Rep {
            double value;
            std::size_t count;
        };
        std::vector<Rep> reps;
        for (std::size_t i = 0; i < sorted.size();) {
            std::size_t j = i;
            while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
            const std::size_t count = j - i + 1;
            if (static_cast<double>(count) > repeat_cut) reps.push_back({sorted[i], count});
            i = j + 1;
        }
        if (!reps.empty()) {
            cs.kind = FeatureKind::MixedNumerical;
            std::stable_sort(reps.begin(), reps.end(),
                             [](const Rep& a, const Rep& b) { return a.count > b.count; });
            for (const auto& r : reps) cs.repeated.push_back(r.value);
        }
        cs.scaler = opts.scaler == ScalerKind::MinMax
                        ? NumScaler::fit_minmax(col.nums)
                        : NumScaler::fit_quantile(col.nums, opts.n_quantiles);
        schema.cols.push_back(std::move(cs));
    }
    return schema;
}

struct ProcessedTable {
    Matrix x;
    BlockLayout layout;
    std::vector<double> num_lo;
    std::vector<double> num_hi;
};

namespace detail {

inline int lookup_code(const ColumnSchema& cs, const Column& col, std::size_t row) {
    if (cs.text) {
        const auto& v = col.texts[row];
        const auto it = std::lower_bound(cs.labels_text.begin(), cs.labels_text.end(), v);
        if (it == cs.labels_text.end() || *it != v)
            throw SchemaError("column '" + cs.name + "': unseen category '" + v + "'");
        return static_cast<int>(it - cs.labels_text.begin());
    }
    const double v = col.nums[row];
    const auto it = std::lower_bound(cs.labels_num.begin(), cs.labels_num.end(), v);
    if (it == cs.labels_num.end() || *it != v)
        throw SchemaError("column '" + cs.name + "': unseen category '" + std::to_string(v) + "'");
    return static_cast<int>(it - cs.labels_num.begin());
}

inline int mixed_label(const ColumnSchema& cs, double v) {
    for (std::size_t k = 0; k < cs.repeated.size(); ++k)
        if (cs.repeated[k] == v) return static_cast<int>(k + 1);
    return 0;
}

}  // namespace detail

inline ProcessedTable preprocess(const RawTable& table, const TableSchema& schema) {
    table.validate();
    if (table.cols.size() != schema.cols.size())
        throw SchemaError("preprocess: table has " + std::to_string(table.cols.size()) +
                          " columns, schema has " + std::to_string(schema.cols.size()));
    for (std::size_t i = 0; i < schema.cols.size(); ++i) {
        if (table.cols[i].name != schema.cols[i].name)
            throw SchemaError("preprocess: column " + std::to_string(i) + " is '" +
                              table.cols[i].name + "', schema expects '" + schema.cols[i].name +
                              "'");
        if (table.cols[i].text != schema.cols[i].text)
            throw SchemaError("preprocess: column '" + table.cols[i].name +
                              "' text/numeric type differs from schema");
    }
    const BlockLayout layout = schema.layout();
    ProcessedTable out;
    out.layout = layout;
    out.x = Matrix(table.rows, layout.width());
    for (std::size_t s = 0; s < layout.num_cols.size(); ++s) {
        const ColumnSchema& cs = schema.cols[layout.num_cols[s]];
        const Column& col = table.cols[layout.num_cols[s]];
        for (std::size_t i = 0; i < table.rows; ++i) out.x(i, s) = cs.scaler.apply(col.nums[i]);
        out.num_lo.push_back(cs.scaler.lo());
        out.num_hi.push_back(cs.scaler.hi());
    }
    for (std::size_t s = 0; s < layout.bin_cols.size(); ++s) {
        const ColumnSchema& cs = schema.cols[layout.bin_cols[s]];
        const Column& col = table.cols[layout.bin_cols[s]];
        for (std::size_t i = 0; i < table.rows; ++i)
            out.x(i, layout.bin_off() + s) = detail::lookup_code(cs, col, i);
    }
    for (std::size_t s = 0; s < layout.cat_cols.size(); ++s) {
        const ColumnSchema& cs = schema.cols[layout.cat_cols[s]];
        const Column& col = table.cols[layout.cat_cols[s]];
        const double denom = static_cast<double>(layout.cat_cards[s] - 1);
        for (std::size_t i = 0; i < table.rows; ++i) {
            const int code = cs.kind == FeatureKind::MixedNumerical
                                 ? detail::mixed_label(cs, col.nums[i])
                                 : detail::lookup_code(cs, col, i);
            out.x(i, layout.cat_off() + s) = denom == 0.0 ? 0.0 : code / denom;
        }
    }
    return out;
}

// Decoder output per block: numerical values still in scaler space, binary
// and categorical slots as integer codes.
struct DecodedTable {
    Matrix nums;
    Matrix bins;
    Matrix cats;
};

inline RawTable postprocess(const DecodedTable& decoded, const TableSchema& schema) {
    const BlockLayout layout = schema.layout();
    const std::size_t n = decoded.nums.rows ? decoded.nums.rows
                          : decoded.bins.rows ? decoded.bins.rows
                                              : decoded.cats.rows;
    if (decoded.nums.cols != layout.num_width() || decoded.bins.cols != layout.bin_width() ||
        decoded.cats.cols != layout.cat_width())
        throw SchemaError("postprocess: decoded block widths do not match schema layout");
    if ((decoded.nums.cols && decoded.nums.rows != n) ||
        (decoded.bins.cols && decoded.bins.rows != n) ||
        (decoded.cats.cols && decoded.cats.rows != n))
        throw SchemaError("postprocess: decoded block row counts disagree");

    std::vector<std::size_t> num_slot(schema.cols.size(), 0), bin_slot(schema.cols.size(), 0),
        cat_slot(schema.cols.size(), 0);
    for (std::size_t s = 0; s < layout.num_cols.size(); ++s) num_slot[layout.num_cols[s]] = s;
    for (std::size_t s = 0; s < layout.bin_cols.size(); ++s) bin_slot[layout.bin_cols[s]] = s;
    for (std::size_t s = 0; s < layout.cat_cols.size(); ++s) cat_slot[layout.cat_cols[s]] = s;

    RawTable out;
    out.rows = n;
    for (std::size_t ci = 0; ci < schema.cols.size(); ++ci) {
        const ColumnSchema& cs = schema.cols[ci];
        Column col;
        col.name = cs.name;
        col.text = cs.kind == FeatureKind::Numerical || cs.kind == FeatureKind::MixedNumerical
                       ? false
                       : cs.text;
        if (cs.kind == FeatureKind::Numerical) {
            col.nums.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                double v = cs.scaler.invert(decoded.nums(i, num_slot[ci]));
                if (cs.integer) v = std::round(v);
                col.nums[i] = v;
            }
        } else if (cs.kind == FeatureKind::MixedNumerical) {
            const std::size_t K = cs.repeated.size();
            col.nums.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                const long long label = std::llround(decoded.cats(i, cat_slot[ci]));
                if (label < 0 || static_cast<std::size_t>(label) > K)
                    throw SchemaError("postprocess: column '" + cs.name + "': dummy label " +
                                      std::to_string(label) + " exceeds K=" + std::to_string(K));
                if (label == 0) {
                    double v = cs.scaler.invert(decoded.nums(i, num_slot[ci]));
                    if (cs.integer) v = std::round(v);
                    col.nums[i] = v;
                } else {
                    col.nums[i] = cs.repeated[static_cast<std::size_t>(label - 1)];
                }
            }
        } else {
            const std::size_t K = cs.cardinality();
            const bool is_bin = cs.kind == FeatureKind::Binary;
            if (col.text)
                col.texts.resize(n);
            else
                col.nums.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                const long long code = std::llround(is_bin ? decoded.bins(i, bin_slot[ci])
                                                           : decoded.cats(i, cat_slot[ci]));
                if (code < 0 || static_cast<std::size_t>(code) >= K)
                    throw SchemaError("postprocess: column '" + cs.name + "': code " +
                                      std::to_string(code) + " out of range for K=" +
                                      std::to_string(K));
                if (col.text)
                    col.texts[i] = cs.labels_text[static_cast<std::size_t>(code)];
                else
                    col.nums[i] = cs.labels_num[static_cast<std::size_t>(code)];
            }
        }
        out.cols.push_back(std::move(col));
    }
    return out;
}

inline nlohmann::ordered_json schema_to_json(const TableSchema& schema) {
    nlohmann::ordered_json j;
    j["format"] = "tabsynth-schema";
    j["version"] = 1;
    j["distinct_threshold"] = schema.opts.distinct_threshold;
    j["h_percent"] = schema.opts.h_percent;
    j["scaler"] = scaler_name(schema.opts.scaler);
    j["n_quantiles"] = schema.opts.n_quantiles;
    j["columns"] = nlohmann::ordered_json::array();
    for (const auto& cs : schema.cols) {
        nlohmann::ordered_json c;
        c["name"] = cs.name;
        c["kind"] = kind_name(cs.kind);
        if (cs.kind == FeatureKind::Numerical || cs.kind == FeatureKind::MixedNumerical) {
            c["integer"] = cs.integer;
            if (cs.kind == FeatureKind::MixedNumerical) c["repeated"] = cs.repeated;
            nlohmann::ordered_json sj;
            sj["kind"] = scaler_name(cs.scaler.kind);
            if (cs.scaler.kind == ScalerKind::MinMax) {
                sj["min"] = cs.scaler.mn;
                sj["max"] = cs.scaler.mx;
            } else {
                sj["knots"] = cs.scaler.knots;
                sj["levels"] = cs.scaler.levels;
            }
            c["scaler"] = std::move(sj);
        } else {
            c["text"] = cs.text;
            if (cs.text)
                c["labels"] = cs.labels_text;
            else
                c["labels"] = cs.labels_num;
        }
        j["columns"].push_back(std::move(c));
    }
    return j;
}

inline TableSchema schema_from_json(const nlohmann::json& j) {
    if (!j.is_object() || j.value("format", "") != std::string("tabsynth-schema"))
        throw SchemaError("schema document is not a tabsynth-schema file");
    if (j.value("version", -1) != 1)
        throw SchemaError("schema document has incompatible version " +
                          j.value("version", nlohmann::json()).dump());
    TableSchema schema;
    schema.opts.distinct_threshold = j.at("distinct_threshold").get<std::size_t>();
    schema.opts.h_percent = j.at("h_percent").get<double>();
    schema.opts.scaler = scaler_from_name(j.at("scaler").get<std::string>());
    schema.opts.n_quantiles = j.at("n_quantiles").get<std::size_t>();
    for (const auto& c : j.at("columns")) {
        ColumnSchema cs;
        cs.name = c.at("name").get<std::string>();
        cs.kind = kind_from_name(c.at("kind").get<std::string>());
        if (cs.kind == FeatureKind::Numerical || cs.kind == FeatureKind::MixedNumerical) {
            cs.integer = c.at("integer").get<bool>();
            if (cs.kind == FeatureKind::MixedNumerical)
                cs.repeated = c.at("repeated").get<std::vector<double>>();
            const auto& sj = c.at("scaler");
            cs.scaler.kind = scaler_from_name(sj.at("kind").get<std::string>());
            if (cs.scaler.kind == ScalerKind::MinMax) {
                cs.scaler.mn = sj.at("min").get<double>();
                cs.scaler.mx = sj.at("max").get<double>();
            } else {
                cs.scaler.knots = sj.at("knots").get<std::vector<double>>();
                cs.scaler.levels = sj.at("levels").get<std::vector<double>>();
                cs.scaler.finalize();
            }
        } else {
            cs.text = c.at("text").get<bool>();
            if (cs.text)
                cs.labels_text = c.at("labels").get<std::vector<std::string>>();
            else
                cs.labels_num = c.at("labels").get<std::vector<double>>();
        }
        schema.cols.push_back(std::move(cs));
    }
    return schema;
}

inline void save_schema(const std::string& path, const TableSchema& schema) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw SchemaError("save_schema: cannot open " + path);
    out << schema_to_json(schema).dump(2) << '\n';
    if (!out) throw SchemaError("save_schema: write failed for " + path);
}

inline TableSchema load_schema(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("load_schema: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("load_schema: " + path + ": " + e.what());
    }
    return schema_from_json(j);
}

}  // namespace tabsynth
