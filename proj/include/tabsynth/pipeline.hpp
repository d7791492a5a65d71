#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include <tabsynth/autoencoder.hpp>
#include <tabsynth/csv.hpp>
#include <tabsynth/diffusion.hpp>
#include <tabsynth/gan.hpp>
#include <tabsynth/report.hpp>
#include <tabsynth/schema.hpp>
#include <tabsynth/table.hpp>

namespace tabsynth {

struct PipelineError : std::runtime_error {
    explicit PipelineError(const std::string& msg) : std::runtime_error(msg) {}
};

enum class ModelVariant { StasyAutoDiff, TabAutoDiff, MedAutoDiff, AutoGan };

inline const char* variant_name(ModelVariant v) {
    switch (v) {
        case ModelVariant::StasyAutoDiff: return "stasy_autodiff";
        case ModelVariant::TabAutoDiff: return "tab_autodiff";
        case ModelVariant::MedAutoDiff: return "med_autodiff";
        default: return "autogan";
    }
}

inline ModelVariant variant_from_name(const std::string& s) {
    if (s == "stasy_autodiff") return ModelVariant::StasyAutoDiff;
    if (s == "tab_autodiff") return ModelVariant::TabAutoDiff;
    if (s == "med_autodiff") return ModelVariant::MedAutoDiff;
    if (s == "autogan") return ModelVariant::AutoGan;
    throw PipelineError("unknown model variant '" + s + "'");
}

struct RunConfig {
    std::string data_csv;
    std::string target;
    std::string out_dir;
    ModelVariant variant = ModelVariant::TabAutoDiff;
    std::uint64_t seed = 1;
    SchemaOptions schema_opts;
    AutoencoderSpec ae;
    AeTrainConfig ae_train;
    SdeConfig sde;
    ScoreNetSpec score;
    DiffusionTrainConfig diff_train;
    GanSpec gan;
    GanTrainConfig gan_train;
    SamplerConfig sampler;
};

// Variant-consistent defaults; explicit config keys override them afterwards.
inline RunConfig apply_variant_defaults(RunConfig c) {
    switch (c.variant) {
        case ModelVariant::StasyAutoDiff:
            c.schema_opts.scaler = ScalerKind::MinMax;
            c.score.variant = ScoreVariant::StasyConcatSquash;
            c.ae.loss = AeLoss::Heterogeneous;
            break;
        case ModelVariant::TabAutoDiff:
            c.schema_opts.scaler = ScalerKind::QuantileGauss;
            c.score.variant = ScoreVariant::TabTimeMlp;
            c.ae.loss = AeLoss::Heterogeneous;
            break;
        case ModelVariant::MedAutoDiff:
            c.schema_opts.scaler = ScalerKind::MinMax;
            c.score.variant = ScoreVariant::TabTimeMlp;
            c.ae.loss = AeLoss::MedMse;
            break;
        case ModelVariant::AutoGan:
            c.schema_opts.scaler = ScalerKind::MinMax;
            c.ae.loss = AeLoss::MedMse;
            break;
    }
    return c;
}

inline RunConfig parse_run_config(const nlohmann::json& j) {
    RunConfig c;
    c.variant = variant_from_name(j.value("variant", std::string(variant_name(c.variant))));
    c = apply_variant_defaults(c);
    c.data_csv = j.value("data_csv", c.data_csv);
    c.target = j.value("target", c.target);
    c.out_dir = j.value("out_dir", c.out_dir);
    c.seed = j.value("seed", c.seed);
    if (j.contains("schema")) {
        const auto& s = j.at("schema");
        c.schema_opts.distinct_threshold =
            s.value("distinct_threshold", c.schema_opts.distinct_threshold);
        c.schema_opts.h_percent = s.value("h_percent", c.schema_opts.h_percent);
        if (s.contains("scaler"))
            c.schema_opts.scaler = scaler_from_name(s.at("scaler").get<std::string>());
        c.schema_opts.n_quantiles = s.value("n_quantiles", c.schema_opts.n_quantiles);
    }
    if (j.contains("autoencoder")) {
        const auto& a = j.at("autoencoder");
        c.ae.hidden = a.value("hidden", c.ae.hidden);
        c.ae.enc_blocks = a.value("enc_blocks", c.ae.enc_blocks);
        c.ae.dec_blocks = a.value("dec_blocks", c.ae.dec_blocks);
        if (a.contains("loss")) c.ae.loss = ae_loss_from_name(a.at("loss").get<std::string>());
        c.ae_train.epochs = a.value("epochs", c.ae_train.epochs);
        c.ae_train.batch = a.value("batch", c.ae_train.batch);
        c.ae_train.adam.lr = a.value("lr", c.ae_train.adam.lr);
    }
    if (j.contains("diffusion")) {
        const auto& d = j.at("diffusion");
        c.sde.beta0 = d.value("beta0", c.sde.beta0);
        c.sde.beta1 = d.value("beta1", c.sde.beta1);
        c.sde.eps = d.value("eps", c.sde.eps);
        c.sde.T = d.value("t_max", c.sde.T);
        if (d.contains("sigma"))
            c.sde.sigma_mode = sigma_convention_from_name(d.at("sigma").get<std::string>());
        if (d.contains("lambda"))
            c.sde.lambda_mode = lambda_weight_from_name(d.at("lambda").get<std::string>());
        c.diff_train.steps = d.value("steps", c.diff_train.steps);
        c.diff_train.batch = d.value("batch", c.diff_train.batch);
        c.diff_train.adam.lr = d.value("lr", c.diff_train.adam.lr);
        if (d.contains("score")) {
            const auto& s = d.at("score");
            if (s.contains("variant"))
                c.score.variant = score_variant_from_name(s.at("variant").get<std::string>());
            c.score.stasy_widths = s.value("stasy_widths", c.score.stasy_widths);
            c.score.tab_proj = s.value("tab_proj", c.score.tab_proj);
            c.score.tab_blocks = s.value("tab_blocks", c.score.tab_blocks);
            c.score.tab_dropout = s.value("tab_dropout", c.score.tab_dropout);
            c.score.time_dim = s.value("time_dim", c.score.time_dim);
            c.score.time_scale = s.value("time_scale", c.score.time_scale);
        }
    }
    if (j.contains("gan")) {
        const auto& g = j.at("gan");
        c.gan.noise = g.value("noise", c.gan.noise);
        c.gan.width = g.value("width", c.gan.width);
        c.gan.blocks = g.value("blocks", c.gan.blocks);
        c.gan.bn_momentum = g.value("bn_momentum", c.gan.bn_momentum);
        c.gan.bn_eps = g.value("bn_eps", c.gan.bn_eps);
        c.gan.lr_g = g.value("lr_g", c.gan.lr_g);
        c.gan.lr_d = g.value("lr_d", c.gan.lr_d);
        c.gan_train.steps = g.value("steps", c.gan_train.steps);
        c.gan_train.batch = g.value("batch", c.gan_train.batch);
    }
    if (j.contains("sampler")) {
        const auto& s = j.at("sampler");
        c.sampler.steps = s.value("steps", c.sampler.steps);
        c.sampler.batch = s.value("batch", c.sampler.batch);
    }
    return c;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw PipelineError("cannot open config '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw PipelineError("config '" + path + "': " + e.what());
    }
    return parse_run_config(j);
}

// Every effective value, defaults included, so a run manifest is
// self-describing.
inline nlohmann::ordered_json run_config_json(const RunConfig& c) {
    nlohmann::ordered_json j;
    j["variant"] = variant_name(c.variant);
    j["data_csv"] = c.data_csv;
    j["target"] = c.target;
    j["out_dir"] = c.out_dir;
    j["seed"] = c.seed;
    j["schema"] = {{"distinct_threshold", c.schema_opts.distinct_threshold},
                   {"h_percent", c.schema_opts.h_percent},
                   {"scaler", scaler_name(c.schema_opts.scaler)},
                   {"n_quantiles", c.schema_opts.n_quantiles}};
    j["autoencoder"] = {{"hidden", c.ae.hidden},
                        {"enc_blocks", c.ae.enc_blocks},
                        {"dec_blocks", c.ae.dec_blocks},
                        {"loss", ae_loss_name(c.ae.loss)},
                        {"epochs", c.ae_train.epochs},
                        {"batch", c.ae_train.batch},
                        {"lr", c.ae_train.adam.lr}};
    j["diffusion"] = {{"beta0", c.sde.beta0},
                      {"beta1", c.sde.beta1},
                      {"eps", c.sde.eps},
                      {"t_max", c.sde.T},
                      {"sigma", sigma_convention_name(c.sde.sigma_mode)},
                      {"lambda", lambda_weight_name(c.sde.lambda_mode)},
                      {"steps", c.diff_train.steps},
                      {"batch", c.diff_train.batch},
                      {"lr", c.diff_train.adam.lr},
                      {"score",
                       {{"variant", score_variant_name(c.score.variant)},
                        {"stasy_widths", c.score.stasy_widths},
                        {"tab_proj", c.score.tab_proj},
                        {"tab_blocks", c.score.tab_blocks},
                        {"tab_dropout", c.score.tab_dropout},
                        {"time_dim", c.score.time_dim},
                        {"time_scale", c.score.time_scale}}}};
    j["gan"] = {{"noise", c.gan.noise},
                {"width", c.gan.width},
                {"blocks", c.gan.blocks},
                {"bn_momentum", c.gan.bn_momentum},
                {"bn_eps", c.gan.bn_eps},
                {"lr_g", c.gan.lr_g},
                {"lr_d", c.gan.lr_d},
                {"steps", c.gan_train.steps},
                {"batch", c.gan_train.batch}};
    j["sampler"] = {{"steps", c.sampler.steps}, {"batch", c.sampler.batch}};
    return j;
}

namespace detail {

// Partial outputs are staged next to the target and renamed in at the end, so
// a failed command never leaves a half-written directory behind.
struct StagedDir {
    std::filesystem::path tmp;
    std::filesystem::path final;
    bool committed = false;

    StagedDir(const std::string& target) : tmp(target + ".partial"), final(target) {
        namespace fs = std::filesystem;
        if (fs::exists(final)) throw PipelineError("output '" + target + "' already exists");
        fs::remove_all(tmp);
        fs::create_directories(tmp);
    }
    void commit() {
        std::filesystem::rename(tmp, final);
        committed = true;
    }
    ~StagedDir() {
        if (!committed) {
            std::error_code ec;
            std::filesystem::remove_all(tmp, ec);
        }
    }
};

}  // namespace detail

// infer schema -> preprocess -> autoencoder -> standardized latents ->
// generative model, all artifacts written in one directory.
inline void fit_run(const RunConfig& cfg) {
    if (cfg.data_csv.empty() || cfg.target.empty() || cfg.out_dir.empty())
        throw PipelineError("fit: data_csv, target and out_dir are required");
    const CsvReadResult rr = read_csv(cfg.data_csv);
    rr.table.validate();
    if (!rr.table.has_col(cfg.target))
        throw PipelineError("fit: no column named '" + cfg.target + "' in " + cfg.data_csv);
    if (rr.table.rows < 2) throw PipelineError("fit: need at least 2 rows");

    const TableSchema schema = infer_schema(rr.table, cfg.schema_opts);
    const ProcessedTable pt = preprocess(rr.table, schema);

    Rng master(cfg.seed);
    Rng ae_rng = master.fork(0);
    Rng gen_rng = master.fork(1);

    std::vector<double> ae_curve;
    AutoencoderModel ae = train_autoencoder(pt, cfg.ae, cfg.ae_train, ae_rng, &ae_curve);
    quantize_params_f32(ae.enc);
    quantize_params_f32(ae.dec);
    const Matrix latents = encode(ae, pt.x);
    const LatentStats stats = fit_latent_stats(latents);
    const Matrix z = apply_standardize(latents, stats);

    detail::StagedDir stage(cfg.out_dir);
    const std::string dir = stage.tmp.string();

    nlohmann::ordered_json manifest;
    manifest["format"] = "tabsynth-run";
    manifest["version"] = 1;
    manifest["config"] = run_config_json(cfg);
    manifest["data"] = {{"rows", rr.table.rows},
                        {"dropped_rows", rr.dropped_rows},
                        {"columns", rr.table.cols.size()},
                        {"processed_width", pt.x.cols}};
    manifest["curves"] = nlohmann::ordered_json::object();
    manifest["curves"]["autoencoder"] = ae_curve;

    if (cfg.variant == ModelVariant::AutoGan) {
        std::vector<GanStepLosses> curve;
        GanModel g = train_gan(z, cfg.gan, cfg.gan_train, gen_rng, &curve);
        g.stats = stats;
        g.train_seed = cfg.seed;
        quantize_params_f32(g.gen);
        quantize_params_f32(g.disc);
        save_gan(dir, g);
        std::vector<double> dl(curve.size()), gl(curve.size());
        for (std::size_t i = 0; i < curve.size(); ++i) {
            dl[i] = curve[i].d_loss;
            gl[i] = curve[i].g_loss;
        }
        manifest["curves"]["discriminator"] = dl;
        manifest["curves"]["generator"] = gl;
    } else {
        std::vector<double> curve;
        DiffusionBundle b = train_diffusion(z, cfg.sde, cfg.score, cfg.diff_train, gen_rng, &curve);
        b.stats = stats;
        b.train_seed = cfg.seed;
        quantize_params_f32(b.theta);
        save_diffusion(dir, b);
        manifest["curves"]["score_net"] = curve;
    }

    save_schema(dir + "/schema.json", schema);
    save_autoencoder(dir, ae);
    {
        std::ofstream out(dir + "/run_manifest.json", std::ios::binary);
        if (!out) throw PipelineError("fit: cannot write run manifest");
        out << manifest.dump(2) << '\n';
    }
    stage.commit();
}

inline nlohmann::json load_run_manifest(const std::string& model_dir) {
    std::ifstream in(model_dir + "/run_manifest.json", std::ios::binary);
    if (!in) throw PipelineError("cannot open '" + model_dir + "/run_manifest.json'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw PipelineError(std::string("run manifest: ") + e.what());
    }
    if (j.value("format", "") != std::string("tabsynth-run") || j.value("version", -1) != 1)
        throw ParamVersionError("run manifest: unrecognized format");
    return j;
}

// Latent sampling, decoding and postprocessing back to the original column
// layout. The CSV and its sidecar are staged and renamed in together.
inline RawTable sample_run(const std::string& model_dir, std::size_t n_rows, std::uint64_t seed,
                           const std::string& out_csv) {
    if (n_rows == 0) throw PipelineError("sample: n_rows must be positive");
    const nlohmann::json manifest = load_run_manifest(model_dir);
    const ModelVariant variant =
        variant_from_name(manifest.at("config").at("variant").get<std::string>());
    const TableSchema schema = load_schema(model_dir + "/schema.json");
    const AutoencoderModel ae = load_autoencoder(model_dir);

    Matrix latents;
    if (variant == ModelVariant::AutoGan) {
        const GanModel g = load_gan(model_dir);
        latents = gan_sample(g, n_rows, seed);
    } else {
        const DiffusionBundle b = load_diffusion(model_dir);
        SamplerConfig sc;
        const auto& sj = manifest.at("config").at("sampler");
        sc.steps = sj.at("steps").get<std::size_t>();
        sc.batch = sj.at("batch").get<std::size_t>();
        sc.seed = seed;
        latents = euler_maruyama_sample(b, n_rows, sc);
    }

    const DecodedTable decoded = decode_table(ae, latents);
    const RawTable table = postprocess(decoded, schema);

    const std::string tmp_csv = out_csv + ".partial";
    const std::string tmp_meta = out_csv + ".meta.json.partial";
    try {
        write_csv(tmp_csv, table);
        nlohmann::ordered_json meta;
        meta["format"] = "tabsynth-sample";
        meta["version"] = 1;
        meta["seed"] = seed;
        meta["rows"] = n_rows;
        meta["variant"] = variant_name(variant);
        std::ofstream out(tmp_meta, std::ios::binary);
        if (!out) throw PipelineError("sample: cannot write sidecar");
        out << meta.dump(2) << '\n';
        out.close();
        std::filesystem::rename(tmp_csv, out_csv);
        std::filesystem::rename(tmp_meta, out_csv + ".meta.json");
    } catch (...) {
        std::error_code ec;
        std::filesystem::remove(tmp_csv, ec);
        std::filesystem::remove(tmp_meta, ec);
        throw;
    }
    return table;
}

struct EvaluateOptions {
    std::string target;
    std::optional<TaskKind> task;  // unset = infer from the target's kind
    std::uint64_t tstr_seed = 0;
    bool normalize_dcr = false;
    SchemaOptions schema_opts;
};

inline EvaluationReport evaluate_run(const std::string& real_csv,
                                     const std::vector<std::string>& syn_csvs,
                                     const EvaluateOptions& opts, const std::string& out_dir) {
    if (syn_csvs.empty()) throw PipelineError("evaluate: no synthetic tables given");
    const CsvReadResult real = read_csv(real_csv);
    real.table.validate();
    if (!real.table.has_col(opts.target))
        throw PipelineError("evaluate: no column named '" + opts.target + "' in " + real_csv);
    const TableSchema schema = infer_schema(real.table, opts.schema_opts);

    std::vector<std::pair<std::string, RawTable>> syns;
    for (const std::string& path : syn_csvs) {
        CsvReadResult rr = read_csv(path);
        rr.table.validate();
        syns.emplace_back(std::filesystem::path(path).stem().string(), std::move(rr.table));
    }

    EvalConfig cfg;
    cfg.target = opts.target;
    cfg.task = opts.task;
    cfg.tstr.seed = opts.tstr_seed;
    cfg.normalize_dcr = opts.normalize_dcr;
    const EvaluationReport rep = evaluate_tables(real.table, syns, schema, cfg);

    detail::StagedDir stage(out_dir);
    write_report(stage.tmp.string(), rep);
    stage.commit();
    return rep;
}

struct DatasetEntry {
    std::string name;
    std::string source;
    std::string task;
    std::string target;
};

// The benchmark tables the synthesis models are usually scored on. Referenced
// by source only; nothing is downloaded.
inline const std::vector<DatasetEntry>& dataset_manifest() {
    static const std::vector<DatasetEntry> entries = {
        {"abalone", "https://www.openml.org/search?type=data&sort=runs&id=183&status=active",
         "multiclass", "Class_number_of_rings"},
        {"adult", "https://archive.ics.uci.edu/dataset/2/adult", "binary", "income"},
        {"Bean", "https://archive.ics.uci.edu/dataset/602/dry+bean+dataset", "multiclass",
         "Class"},
        {"Churn-Modelling", "https://www.kaggle.com/datasets/shrutimechlearn/churn-modelling",
         "binary", "Exited"},
        {"faults", "https://archive.ics.uci.edu/dataset/198/steel+plates+faults", "multiclass",
         "Class"},
        {"HTRU", "https://archive.ics.uci.edu/dataset/372/htru2", "binary", "class"},
        {"indian liver patient",
         "https://www.kaggle.com/datasets/uciml/indian-liver-patient-records?resource=download",
         "binary", "Dataset"},
        {"insurance", "https://www.kaggle.com/datasets/mirichoi0218/insurance", "regression",
         "charges"},
        {"Magic",
         "https://www.kaggle.com/datasets/abhinand05/magic-gamma-telescope-dataset?resource=download",
         "binary", "class"},
        {"News", "https://archive.ics.uci.edu/dataset/332/online+news+popularity", "regression",
         "shares"},
        {"nursery", "https://www.kaggle.com/datasets/heitornunes/nursery", "multiclass", "class"},
        {"Obesity", "https://www.kaggle.com/datasets/tathagatbanerjee/obesity-dataset-uci-ml",
         "multiclass", "NObeyesdad"},
        {"Shoppers", "https://www.kaggle.com/datasets/henrysue/online-shoppers-intention",
         "binary", "Revenue"},
        {"Titanic", "https://www.kaggle.com/c/titanic/data", "multiclass", "Survived"},
        {"wilt", "https://www.openml.org/search?type=data&sort=runs&id=40983&status=active",
         "binary", "class"},
    };
    return entries;
}

inline void print_dataset_manifest(std::ostream& out) {
    for (const DatasetEntry& e : dataset_manifest())
        out << e.name << "\t" << e.task << "\ttarget=" << e.target << "\t" << e.source << "\n";
}

}  // namespace tabsynth
