#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include <tabsynth/csv.hpp>
#include <tabsynth/metrics.hpp>
#include <tabsynth/schema.hpp>
#include <tabsynth/table.hpp>
#include <tabsynth/tstr.hpp>

namespace tabsynth {

struct EvalConfig {
    std::string target;
    std::optional<TaskKind> task;  // unset = infer from the target's schema kind
    TstrConfig tstr;
    bool normalize_dcr = false;
};

struct TableEval {
    std::string name;
    std::vector<std::pair<std::string, double>> wd;  // numerical columns
    std::vector<std::pair<std::string, double>> js;  // binary and categorical columns
    double wd_mean = 0.0;
    double js_mean = 0.0;
    CorrDiffs corr;
    double mean_dcr = 0.0;
    TstrResult tstr;
    CorrelationMatrices syn_corr;
};

struct EvaluationReport {
    EvalConfig cfg;
    TaskKind task = TaskKind::Binary;
    KindColumns real_kinds;  // names only matter downstream
    CorrelationMatrices real_corr;
    std::vector<TableEval> tables;
};

inline TaskKind infer_task(const TableSchema& schema, const std::string& target) {
    for (const ColumnSchema& cs : schema.cols) {
        if (cs.name != target) continue;
        if (cs.kind == FeatureKind::Binary) return TaskKind::Binary;
        if (cs.kind == FeatureKind::Categorical) return TaskKind::Multiclass;
        return TaskKind::Regression;
    }
    throw MetricError("infer_task: no column named '" + target + "'");
}

// Full metric battery for each synthetic table against the same real table.
inline EvaluationReport evaluate_tables(
    const RawTable& real, const std::vector<std::pair<std::string, RawTable>>& syns,
    const TableSchema& schema, const EvalConfig& cfg) {
    if (syns.empty()) throw MetricError("evaluate_tables: no synthetic tables");
    real.validate();

    EvaluationReport rep;
    rep.cfg = cfg;
    rep.task = cfg.task ? *cfg.task : infer_task(schema, cfg.target);
    rep.real_kinds = kind_columns(real, schema);
    rep.real_corr = correlation_matrices(real, schema);

    TstrConfig tstr_cfg = cfg.tstr;
    tstr_cfg.task = rep.task;

    for (const auto& [name, syn] : syns) {
        syn.validate();
        const KindColumns ks = kind_columns(syn, schema);
        TableEval te;
        te.name = name;
        for (std::size_t c = 0; c < rep.real_kinds.num_vals.size(); ++c) {
            const double w = wasserstein_1d(rep.real_kinds.num_vals[c], ks.num_vals[c], true);
            te.wd.emplace_back(rep.real_kinds.num_names[c], w);
            te.wd_mean += w;
        }
        if (!te.wd.empty()) te.wd_mean /= static_cast<double>(te.wd.size());
        for (std::size_t c = 0; c < rep.real_kinds.cat_keys.size(); ++c) {
            const double j = js_divergence(rep.real_kinds.cat_keys[c], ks.cat_keys[c]);
            te.js.emplace_back(rep.real_kinds.cat_names[c], j);
            te.js_mean += j;
        }
        if (!te.js.empty()) te.js_mean /= static_cast<double>(te.js.size());
        te.syn_corr = correlation_matrices(syn, schema);
        te.corr = corr_l2_diff(rep.real_corr, te.syn_corr);
        te.mean_dcr = mean_dcr(real, syn, schema, cfg.normalize_dcr);
        te.tstr = tstr_evaluate(real, syn, cfg.target, tstr_cfg);
        rep.tables.push_back(std::move(te));
    }
    return rep;
}

namespace detail {

inline std::string safe_stem(const std::string& name) {
    std::string s;
    for (char c : name)
        s += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
    return s.empty() ? std::string("table") : s;
}

inline std::string csv_num(double v) { return std::isfinite(v) ? format_double(v) : ""; }

inline nlohmann::ordered_json scores_json(const ModelScores& s, TaskKind task) {
    nlohmann::ordered_json j;
    j["model"] = s.model;
    if (task == TaskKind::Regression) {
        j["r2"] = std::isfinite(s.r2) ? nlohmann::ordered_json(s.r2) : nullptr;
        j["rmse"] = std::isfinite(s.rmse) ? nlohmann::ordered_json(s.rmse) : nullptr;
    } else {
        j["accuracy"] = s.accuracy;
        j["macro_f1"] = s.macro_f1;
        j["auroc"] = std::isfinite(s.auroc) ? nlohmann::ordered_json(s.auroc) : nullptr;
        j["degenerate"] = s.degenerate;
    }
    return j;
}

// Mean over tables, skipping non-finite entries; NaN when nothing was finite.
inline double finite_mean(const std::vector<double>& v) {
    double s = 0.0;
    std::size_t n = 0;
    for (double x : v)
        if (std::isfinite(x)) {
            s += x;
            ++n;
        }
    return n ? s / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace detail

// report.json plus the flat summary and rank CSVs and per-table heatmap grids.
inline void write_report(const std::string& dir, const EvaluationReport& rep) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const std::size_t nt = rep.tables.size();

    nlohmann::ordered_json j;
    j["format"] = "tabsynth-report";
    j["version"] = "v1";
    j["target"] = rep.cfg.target;
    j["task"] = task_name(rep.task);
    j["tstr_split"] = rep.cfg.tstr.split;
    j["tstr_seed"] = rep.cfg.tstr.seed;
    j["dcr_normalized"] = rep.cfg.normalize_dcr;
    j["ranking"] = "per-dataset mean of per-column values, lower rank = better fidelity";
    j["numerical_columns"] = rep.real_kinds.num_names;
    j["categorical_columns"] = rep.real_kinds.cat_names;

    nlohmann::ordered_json tables = nlohmann::ordered_json::array();
    for (const TableEval& te : rep.tables) {
        nlohmann::ordered_json t;
        t["name"] = te.name;
        nlohmann::ordered_json wd, js;
        for (const auto& [col, v] : te.wd) wd[col] = v;
        for (const auto& [col, v] : te.js) js[col] = v;
        t["wd"] = wd;
        t["js"] = js;
        t["wd_mean"] = te.wd_mean;
        t["js_mean"] = te.js_mean;
        t["corr_l2"] = {{"pearson", te.corr.pearson},
                        {"theils_u", te.corr.theils},
                        {"correlation_ratio", te.corr.ratio}};
        t["mean_dcr"] = te.mean_dcr;
        nlohmann::ordered_json on_real = nlohmann::ordered_json::array();
        nlohmann::ordered_json on_syn = nlohmann::ordered_json::array();
        for (const ModelScores& s : te.tstr.on_real)
            on_real.push_back(detail::scores_json(s, rep.task));
        for (const ModelScores& s : te.tstr.on_syn)
            on_syn.push_back(detail::scores_json(s, rep.task));
        t["tstr"] = {{"trained_on_real", on_real}, {"trained_on_synthetic", on_syn}};
        tables.push_back(std::move(t));
    }
    j["tables"] = std::move(tables);

    const auto collect = [&](auto&& get) {
        std::vector<double> v(nt);
        for (std::size_t i = 0; i < nt; ++i) v[i] = get(rep.tables[i]);
        return v;
    };
    const std::vector<double> wd_means = collect([](const TableEval& t) { return t.wd_mean; });
    const std::vector<double> js_means = collect([](const TableEval& t) { return t.js_mean; });
    const std::vector<double> mdcrs = collect([](const TableEval& t) { return t.mean_dcr; });
    j["averages"] = {{"wd_mean", detail::finite_mean(wd_means)},
                     {"js_mean", detail::finite_mean(js_means)},
                     {"mean_dcr", detail::finite_mean(mdcrs)}};

    // Fidelity ranks across the synthetic tables, one column per metric
    // family that actually has columns.
    std::vector<std::pair<std::string, std::vector<double>>> rank_cols;
    if (!rep.real_kinds.num_names.empty()) rank_cols.emplace_back("wd", wd_means);
    if (!rep.real_kinds.cat_names.empty()) rank_cols.emplace_back("js", js_means);
    if (!rep.real_kinds.num_names.empty())
        rank_cols.emplace_back("pearson_l2",
                               collect([](const TableEval& t) { return t.corr.pearson; }));
    if (!rep.real_kinds.cat_names.empty())
        rank_cols.emplace_back("theils_u_l2",
                               collect([](const TableEval& t) { return t.corr.theils; }));
    if (!rep.real_kinds.num_names.empty() && !rep.real_kinds.cat_names.empty())
        rank_cols.emplace_back("correlation_ratio_l2",
                               collect([](const TableEval& t) { return t.corr.ratio; }));

    Matrix fid(nt, rank_cols.size());
    for (std::size_t c = 0; c < rank_cols.size(); ++c)
        for (std::size_t i = 0; i < nt; ++i) fid(i, c) = rank_cols[c].second[i];
    std::vector<std::vector<double>> per_metric_ranks(rank_cols.size());
    for (std::size_t c = 0; c < rank_cols.size(); ++c) {
        Matrix one(nt, 1);
        for (std::size_t i = 0; i < nt; ++i) one(i, 0) = fid(i, c);
        per_metric_ranks[c] = rank_aggregate(one, RankDirection::LowerBetter);
    }
    const std::vector<double> fid_rank =
        rank_cols.empty() ? std::vector<double>(nt, 1.0)
                          : rank_aggregate(fid, RankDirection::LowerBetter);
    Matrix dcr_m(nt, 1);
    for (std::size_t i = 0; i < nt; ++i) dcr_m(i, 0) = mdcrs[i];
    const std::vector<double> dcr_rank = rank_aggregate(dcr_m, RankDirection::HigherBetter);

    nlohmann::ordered_json ranks = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < nt; ++i) {
        nlohmann::ordered_json r;
        r["name"] = rep.tables[i].name;
        for (std::size_t c = 0; c < rank_cols.size(); ++c)
            r[rank_cols[c].first + "_rank"] = per_metric_ranks[c][i];
        r["fidelity_avg_rank"] = fid_rank[i];
        r["mdcr_rank"] = dcr_rank[i];
        ranks.push_back(std::move(r));
    }
    j["ranks"] = std::move(ranks);

    {
        std::ofstream out(dir + "/report.json", std::ios::binary);
        if (!out) throw MetricError("write_report: cannot open report.json");
        out << j.dump(2) << '\n';
    }

    {
        std::ofstream out(dir + "/table1_fidelity.csv", std::ios::binary);
        out << "table,wd_mean,js_mean,pearson_l2,theils_u_l2,correlation_ratio_l2\n";
        for (const TableEval& te : rep.tables) {
            detail::write_csv_field(out, te.name);
            out << ',' << detail::csv_num(te.wd_mean) << ',' << detail::csv_num(te.js_mean) << ','
                << detail::csv_num(te.corr.pearson) << ',' << detail::csv_num(te.corr.theils)
                << ',' << detail::csv_num(te.corr.ratio) << '\n';
        }
    }
    {
        std::ofstream out(dir + "/table2_utility.csv", std::ios::binary);
        out << "table,model,trained_on,accuracy,macro_f1,auroc,r2,rmse,degenerate\n";
        const auto row = [&](const std::string& name, const ModelScores& s,
                             const char* trained_on) {
            detail::write_csv_field(out, name);
            out << ',' << s.model << ',' << trained_on << ',' << detail::csv_num(s.accuracy) << ','
                << detail::csv_num(s.macro_f1) << ',' << detail::csv_num(s.auroc) << ','
                << detail::csv_num(s.r2) << ',' << detail::csv_num(s.rmse) << ','
                << (s.degenerate ? "true" : "false") << '\n';
        };
        for (const TableEval& te : rep.tables) {
            for (const ModelScores& s : te.tstr.on_real) row(te.name, s, "real");
            for (const ModelScores& s : te.tstr.on_syn) row(te.name, s, "synthetic");
        }
    }
    {
        std::ofstream out(dir + "/table3_privacy.csv", std::ios::binary);
        out << "table,mean_dcr,mdcr_rank\n";
        for (std::size_t i = 0; i < nt; ++i) {
            detail::write_csv_field(out, rep.tables[i].name);
            out << ',' << detail::csv_num(mdcrs[i]) << ',' << detail::csv_num(dcr_rank[i]) << '\n';
        }
    }
    {
        std::ofstream out(dir + "/ranks.csv", std::ios::binary);
        out << "table";
        for (const auto& [label, v] : rank_cols) out << ',' << label << "_rank";
        out << ",fidelity_avg_rank,mdcr_rank\n";
        for (std::size_t i = 0; i < nt; ++i) {
            detail::write_csv_field(out, rep.tables[i].name);
            for (std::size_t c = 0; c < rank_cols.size(); ++c)
                out << ',' << detail::csv_num(per_metric_ranks[c][i]);
            out << ',' << detail::csv_num(fid_rank[i]) << ',' << detail::csv_num(dcr_rank[i])
                << '\n';
        }
    }

    for (const TableEval& te : rep.tables)
        heatmap_export(dir + "/heatmaps/" + detail::safe_stem(te.name), rep.real_corr,
                       te.syn_corr, rep.real_kinds.num_names, rep.real_kinds.cat_names);
}

}  // namespace tabsynth
