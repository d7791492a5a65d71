#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <tabsynth/tabsynth.hpp>

namespace {

// Exit codes: 0 ok, 2 config, 3 data, 4 artifact format, 1 anything else.
// Errors go to stderr as a single machine-readable line.
int fail(const char* category, const std::string& msg, int code) {
    std::cerr << "error category=" << category << " message=" << msg << "\n";
    return code;
}

int run(int argc, char** argv) {
    CLI::App app{"tabular data synthesis: autoencoder latents with diffusion or GAN samplers"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;

    CLI::App* fit = app.add_subcommand("fit", "train a model from a CSV per a config file");
    fit->add_option("-c,--config", config_path, "JSON run config")->required();
    fit->add_option("-o,--out", out_dir, "output directory (overrides config)");
    fit->add_option("-s,--seed", seed, "seed override")->each([&](const std::string&) {
        seed_set = true;
    });

    std::string model_dir, out_csv;
    std::size_t n_rows = 0;
    std::uint64_t sample_seed = 1;
    CLI::App* sample = app.add_subcommand("sample", "draw synthetic rows from a fitted model");
    sample->add_option("-m,--model", model_dir, "fitted model directory")->required();
    sample->add_option("-n,--rows", n_rows, "number of rows")->required();
    sample->add_option("-s,--seed", sample_seed, "sampler seed");
    sample->add_option("-o,--out", out_csv, "output CSV path")->required();

    std::string real_csv, target, task_str, eval_out;
    std::vector<std::string> syn_csvs;
    std::uint64_t tstr_seed = 0;
    bool normalize_dcr = false;
    CLI::App* evaluate =
        app.add_subcommand("evaluate", "score synthetic tables against a real table");
    evaluate->add_option("-r,--real", real_csv, "real CSV")->required();
    evaluate->add_option("-y,--synthetic", syn_csvs, "synthetic CSVs")->required();
    evaluate->add_option("-t,--target", target, "target column")->required();
    evaluate->add_option("--task", task_str, "binary|multiclass|regression (default inferred)");
    evaluate->add_option("--tstr-seed", tstr_seed, "train/test split seed");
    evaluate->add_flag("--normalize-dcr", normalize_dcr, "range-normalize DCR numericals");
    evaluate->add_option("-o,--out", eval_out, "report directory")->required();

    CLI::App* manifest =
        app.add_subcommand("manifest", "list the reference benchmark datasets");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "error category=usage message=" << e.what() << "\n";
        return 2;
    }

    try {
        if (fit->parsed()) {
            tabsynth::RunConfig cfg = tabsynth::load_run_config(config_path);
            if (!out_dir.empty()) cfg.out_dir = out_dir;
            if (seed_set) cfg.seed = seed;
            tabsynth::fit_run(cfg);
            std::cout << "fit: model written to " << cfg.out_dir << "\n";
        } else if (sample->parsed()) {
            tabsynth::sample_run(model_dir, n_rows, sample_seed, out_csv);
            std::cout << "sample: " << n_rows << " rows written to " << out_csv << "\n";
        } else if (evaluate->parsed()) {
            tabsynth::EvaluateOptions opts;
            opts.target = target;
            if (!task_str.empty()) opts.task = tabsynth::task_from_name(task_str);
            opts.tstr_seed = tstr_seed;
            opts.normalize_dcr = normalize_dcr;
            tabsynth::evaluate_run(real_csv, syn_csvs, opts, eval_out);
            std::cout << "evaluate: report written to " << eval_out << "\n";
        } else if (manifest->parsed()) {
            tabsynth::print_dataset_manifest(std::cout);
        }
    } catch (const tabsynth::CsvError& e) {
        return fail("csv", e.what(), 3);
    } catch (const tabsynth::SchemaError& e) {
        return fail("schema", e.what(), 3);
    } catch (const tabsynth::MetricError& e) {
        return fail("metrics", e.what(), 3);
    } catch (const tabsynth::ModelError& e) {
        return fail("models", e.what(), 3);
    } catch (const tabsynth::ParamVersionError& e) {
        return fail("artifact-version", e.what(), 4);
    } catch (const tabsynth::ParamFormatError& e) {
        return fail("artifact-format", e.what(), 4);
    } catch (const tabsynth::PipelineError& e) {
        return fail("pipeline", e.what(), 2);
    } catch (const std::invalid_argument& e) {
        return fail("config", e.what(), 2);
    } catch (const std::exception& e) {
        return fail("internal", e.what(), 1);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
