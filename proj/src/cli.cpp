#include "ikf/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ikf/dataset_io.hpp"
#include "ikf/interleave.hpp"
#include "ikf/lemmas.hpp"
#include "ikf/svg_chart.hpp"

namespace ikf::cli {

namespace fs = std::filesystem;
using nlohmann::json;

OutputFormat parse_format(const std::string& text) {
    if (text == "csv") return OutputFormat::Csv;
    if (text == "svg") return OutputFormat::Svg;
    if (text == "both") return OutputFormat::Both;
    throw ConfigError("unknown output format '" + text + "' (expected csv, svg or both)");
}

namespace {

template <typename T>
T get_unsigned(const json& value, const std::string& key) {
    if (!value.is_number_unsigned()) throw ConfigError("'" + key + "' must be a non-negative integer");
    return value.get<T>();
}

}  // namespace

CliConfig parse_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");

    CliConfig cfg;
    ExperimentConfig& ex = cfg.experiment;
    try {
        for (const auto& [key, value] : doc.items()) {
            if (key == "alpha") ex.alpha = value.get<double>();
            else if (key == "n") ex.n = get_unsigned<Eigen::Index>(value, key);
            else if (key == "q") ex.q = get_unsigned<Eigen::Index>(value, key);
            else if (key == "m") ex.m = get_unsigned<std::size_t>(value, key);
            else if (key == "iterations") ex.iterations = get_unsigned<std::size_t>(value, key);
            else if (key == "noise_sd") ex.noise_sd = value.get<double>();
            else if (key == "feature_sd") ex.feature_sd = value.get<double>();
            else if (key == "master_seed") ex.master_seed = get_unsigned<std::uint64_t>(value, key);
            else if (key == "penguin_mode") ex.penguin_mode = parse_penguin_mode(value.get<std::string>());
            else if (key == "held_out_test") ex.held_out_test = value.get<bool>();
            else if (key == "scenarios") {
                ex.scenarios.clear();
                for (const auto& s : value) ex.scenarios.push_back(parse_scenario(s.get<std::string>()));
            } else if (key == "out") cfg.out = value.get<std::string>();
            else if (key == "format") cfg.format = parse_format(value.get<std::string>());
            else if (key == "threads") cfg.threads = get_unsigned<unsigned>(value, key);
            else throw ConfigError("unknown config key '" + key + "'");
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    try {
        ex.validate();
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

CliConfig load_config(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

namespace {

struct CommonFlags {
    std::optional<std::string> config;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<std::string> out;
    std::optional<std::string> format;
    std::optional<std::size_t> iterations;
};

CliConfig resolve(const CommonFlags& flags) {
    CliConfig cfg = flags.config ? load_config(*flags.config) : CliConfig{};
    if (flags.seed) cfg.experiment.master_seed = *flags.seed;
    if (flags.threads) cfg.threads = *flags.threads;
    if (flags.out) cfg.out = *flags.out;
    if (flags.format) cfg.format = parse_format(*flags.format);
    if (flags.iterations) cfg.experiment.iterations = *flags.iterations;
    try {
        cfg.experiment.validate();
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

void write_text_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("write failed: " + path.string());
}

std::string scenario_color(Scenario s) {
    switch (s) {
        case Scenario::BirdsOnly: return "#d62728";
        case Scenario::FishOnly: return "#ff7f0e";
        case Scenario::PenguinOnly: return "#2ca02c";
        case Scenario::InterleavedBirdFirst: return "#1f77b4";
        case Scenario::InterleavedFishFirst: return "#17becf";
    }
    return "black";
}

LineChart metric_chart(const MonteCarloResult& result, bool bias) {
    LineChart chart;
    chart.title = bias ? "Mean bias per step" : "Mean prediction MSE on penguin test blocks";
    chart.x_label = "step";
    chart.y_label = bias ? "bias" : "MSE";
    for (const StepMetrics& row : result.metrics) {
        auto it = std::find_if(chart.series.begin(), chart.series.end(),
                               [&](const ChartSeries& s) { return s.name == scenario_name(row.scenario); });
        if (it == chart.series.end()) {
            chart.series.push_back({scenario_name(row.scenario), scenario_color(row.scenario), {}});
            it = std::prev(chart.series.end());
        }
        it->points.emplace_back(static_cast<double>(row.step), bias ? row.mean_bias : row.mean_mse);
    }
    return chart;
}

fs::path sibling(const fs::path& base, const std::string& suffix) {
    fs::path p = base;
    p.replace_filename(base.stem().string() + suffix);
    return p;
}

int cmd_generate(const CommonFlags& flags, std::uint64_t iteration, std::ostream& out) {
    const CliConfig cfg = resolve(flags);
    const ExperimentConfig& ex = cfg.experiment;
    const auto [bird, fish] = experiment_populations(ex);
    const GenerationPlan plan = ex.generation_plan();

    Dataset ds;
    ds.data = gen_iteration(bird, fish, plan, SeedPlan{ex.master_seed}, iteration);
    ds.manifest.n = ex.n;
    ds.manifest.q = ex.q;
    ds.manifest.m = ex.m;
    ds.manifest.alpha = ex.alpha;
    ds.manifest.mode = ex.penguin_mode;
    ds.manifest.master_seed = ex.master_seed;
    ds.manifest.iteration = iteration;
    ds.manifest.bird = bird;
    ds.manifest.fish = fish;
    ds.manifest.penguin_weights = ds.data.penguin_weights;
    ds.manifest.penguin_noise_sd = ex.noise_sd;

    const fs::path dir = flags.out ? fs::path(*flags.out) : fs::path("dataset");
    export_dataset(dir, ds);
    out << "wrote dataset to " << dir.string() << '\n';
    return kOk;
}

int cmd_run(const CommonFlags& flags, std::ostream& out) {
    const CliConfig cfg = resolve(flags);
    const MonteCarloResult result = run_monte_carlo(cfg.experiment, cfg.threads);

    if (cfg.format == OutputFormat::Csv || cfg.format == OutputFormat::Both) {
        std::ostringstream csv;
        write_results_csv(csv, result);
        write_text_file(cfg.out, csv.str());
        out << "wrote " << cfg.out.string() << '\n';
    }
    if (cfg.format == OutputFormat::Svg || cfg.format == OutputFormat::Both) {
        const fs::path bias_path = sibling(cfg.out, "_bias.svg");
        const fs::path mse_path = sibling(cfg.out, "_mse.svg");
        write_text_file(bias_path, render_svg(metric_chart(result, true)));
        write_text_file(mse_path, render_svg(metric_chart(result, false)));
        out << "wrote " << bias_path.string() << " and " << mse_path.string() << '\n';
    }
    if (result.n_failed > 0) out << result.n_failed << " iteration(s) failed and were excluded\n";
    return kOk;
}

struct LemmaFlags {
    std::size_t trials = 100;
    std::vector<double> bird_column_sd;
    std::vector<double> fish_column_sd;
    std::optional<double> alpha;
};

int cmd_check_lemmas(const CommonFlags& flags, const LemmaFlags& lemma, std::ostream& out) {
    if (lemma.trials < 1) throw ConfigError("--trials must be at least 1");
    CliConfig cfg = resolve(flags);
    if (lemma.alpha) cfg.experiment.alpha = *lemma.alpha;
    const ExperimentConfig& ex = cfg.experiment;
    try {
        MixtureSpec{ex.alpha};
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }

    const ClosedFormCheckResult closed = check_two_step_closed_form(ex.master_seed, lemma.trials);
    out << "closed_form " << (closed.passed() ? "PASS" : "FAIL") << " instances=" << closed.instances
        << " max_discrepancy=" << format_double(closed.max_discrepancy)
        << " tolerance=" << format_double(closed.tolerance) << '\n';

    UnbiasednessConfig ucfg;
    ucfg.alpha = ex.alpha;
    ucfg.n = ex.n;
    ucfg.q = ex.q;
    ucfg.iterations = ex.iterations;
    ucfg.noise_sd = ex.noise_sd;
    ucfg.feature_sd = ex.feature_sd;
    ucfg.master_seed = ex.master_seed;
    ucfg.bird_column_sd = lemma.bird_column_sd;
    ucfg.fish_column_sd = lemma.fish_column_sd;
    UnbiasednessResult unbiased;
    try {
        unbiased = check_two_step_unbiasedness(ucfg, cfg.threads);
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    } catch (const DimensionMismatch& e) {
        throw ConfigError(e.what());
    }
    out << "unbiasedness " << check_status_name(unbiased.status);
    if (unbiased.status == CheckStatus::SkippedPrecondition) {
        out << " (" << unbiased.note << ")\n";
    } else {
        out << " iterations=" << ucfg.iterations << " alpha=" << format_double(ucfg.alpha)
            << " max_deviation=" << format_double(unbiased.max_deviation)
            << " bound=" << format_double(unbiased.bound) << '\n';
    }

    const bool ok = closed.passed() && unbiased.status != CheckStatus::Fail;
    return ok ? kOk : kCheckFailed;
}

int cmd_estimate_alpha(const std::string& data_dir, std::size_t grid, const std::string& validation,
                       std::ostream& out) {
    if (grid < 2) throw ConfigError("--grid must be at least 2");
    if (validation != "penguin_test" && validation != "penguin") {
        throw ConfigError("--validation must be penguin_test or penguin");
    }
    const Dataset ds = import_dataset(data_dir);
    const auto& val = validation == "penguin" ? ds.data.penguin_train : ds.data.penguin_test;
    const AlphaEstimate est = estimate_alpha(ds.data.birds, ds.data.fish, val, grid);
    out << "alpha=" << format_double(est.alpha) << '\n'
        << "score=" << format_double(est.score) << '\n'
        << "manifest_alpha=" << format_double(ds.manifest.alpha) << '\n';
    return kOk;
}

void add_common(CLI::App* cmd, CommonFlags& flags, bool with_format) {
    cmd->add_option("--config", flags.config, "JSON config file");
    cmd->add_option("--seed", flags.seed, "master seed (overrides config)");
    cmd->add_option("--threads", flags.threads, "worker threads, 0 = auto");
    cmd->add_option("--out", flags.out, "output path");
    cmd->add_option("--iterations", flags.iterations, "Monte Carlo iterations");
    if (with_format) cmd->add_option("--format", flags.format, "csv, svg or both");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Interleaved block-recursive least squares: data generation, Monte Carlo runs and checks",
                 "ikf-cli"};
    app.require_subcommand(1);

    CommonFlags gen_flags;
    std::uint64_t gen_iteration = 0;
    auto* generate = app.add_subcommand("generate", "export one iteration's bird/fish/penguin datasets");
    add_common(generate, gen_flags, false);
    generate->add_option("--iteration", gen_iteration, "iteration index to export");

    CommonFlags run_flags;
    auto* run_cmd = app.add_subcommand("run", "Monte Carlo bias/MSE experiment");
    add_common(run_cmd, run_flags, true);

    CommonFlags lemma_common;
    LemmaFlags lemma_flags;
    auto* lemmas = app.add_subcommand("check-lemmas", "two-step closed form and unbiasedness checks");
    add_common(lemmas, lemma_common, false);
    lemmas->add_option("--trials", lemma_flags.trials, "random instances for the closed-form check");
    lemmas->add_option("--alpha", lemma_flags.alpha, "mixing coefficient (overrides config)");
    lemmas->add_option("--bird-column-sd", lemma_flags.bird_column_sd, "per-column bird feature sd")->delimiter(',');
    lemmas->add_option("--fish-column-sd", lemma_flags.fish_column_sd, "per-column fish feature sd")->delimiter(',');

    std::string data_dir;
    std::size_t grid = 101;
    std::string validation = "penguin_test";
    auto* estimate = app.add_subcommand("estimate-alpha", "grid-search alpha on an exported dataset");
    estimate->add_option("--data", data_dir, "dataset directory written by `generate`")->required();
    estimate->add_option("--grid", grid, "grid size on [0, 1]");
    estimate->add_option("--validation", validation, "penguin_test (default) or penguin");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kConfigError;
    }

    try {
        if (generate->parsed()) return cmd_generate(gen_flags, gen_iteration, out);
        if (run_cmd->parsed()) return cmd_run(run_flags, out);
        if (lemmas->parsed()) return cmd_check_lemmas(lemma_common, lemma_flags, out);
        if (estimate->parsed()) return cmd_estimate_alpha(data_dir, grid, validation, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const IoError& e) {
        err << "I/O error: " << e.what() << '\n';
        return kIoError;
    } catch (const DataQualityError& e) {
        err << "aborted: " << e.what() << '\n';
        return kRuntimeAbort;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kRuntimeAbort;
    }
    return kConfigError;
}

}  // namespace ikf::cli
