#include "commands.hpp"

#include "esn/config_io.hpp"
#include "esn/dataset.hpp"
#include "esn/errors.hpp"
#include "esn/features.hpp"
#include "esn/log.hpp"
#include "esn/pipeline.hpp"
#include "esn/report_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

namespace esn::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> scheme;
    std::optional<std::string> input_mode;
    std::optional<std::string> rule;
    std::optional<std::string> mode;
};

struct Options {
    std::string config;
    std::string out;
    std::string manifest;
    std::string model;
    std::string split = "test";
    int jobs = 1;
    bool verbose = false;
    Overrides overrides;
};

void write_file(const fs::path& path, const std::string& content)
{
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
}

void write_json(const fs::path& path, const json& j)
{
    write_file(path, j.dump(2) + "\n");
}

fs::path require_out(const Options& o)
{
    if (o.out.empty()) {
        throw ConfigError("--out is required");
    }
    return o.out;
}

ExperimentConfig load_config(const Options& o)
{
    if (o.config.empty()) {
        throw ConfigError("--config is required");
    }
    ExperimentConfig c = load_experiment_config(o.config);
    const Overrides& v = o.overrides;
    if (v.seed) {
        c = with_seed(c, *v.seed);
    }
    if (v.scheme) {
        c.scheme.kind = scheme_from_string(*v.scheme);
    }
    if (v.input_mode) {
        c.input_mode = input_mode_from_string(*v.input_mode);
    }
    if (v.rule && *v.rule != plasticity_rule_name(c.plasticity.rule)) {
        c.plasticity.rule = plasticity_rule_from_name(*v.rule);
    }
    if (v.mode) {
        c.readout.mode = readout_mode_from_string(*v.mode);
    }
    if (c.manifest.empty()) {
        throw ConfigError("config has no dataset.manifest");
    }
    c.validate();
    return c;
}

LabeledDataset load_labeled(const ExperimentConfig& c)
{
    const Dataset data = load_dataset(c.manifest);
    LabeledDataset labeled = label_dataset(data, c.scheme);
    log::info("loaded " + std::to_string(data.trial_count()) + " trials, "
              + std::to_string(labeled.size()) + " labeled under " + to_string(c.scheme.kind));
    return labeled;
}

void gen_synthetic(const Options& o)
{
    SyntheticSpec spec = o.config.empty() ? SyntheticSpec{} : load_synthetic_spec(o.config);
    if (o.overrides.seed) {
        spec.seed = *o.overrides.seed;
    }
    if (o.overrides.scheme) {
        spec.scheme.kind = scheme_from_string(*o.overrides.scheme);
    }
    spec.validate();
    const fs::path out = require_out(o);
    const Dataset data = generate_synthetic_dataset(spec);
    const fs::path manifest = save_dataset(data, out);
    write_json(out / "synthetic.json", to_json(spec));
    log::info("wrote " + manifest.string());
}

void extract_features(const Options& o)
{
    const ExperimentConfig c = load_config(o);
    const fs::path out = require_out(o);
    const Dataset data = load_dataset(c.manifest);
    const LabeledDataset labeled = label_dataset(data, c.scheme);
    const BandTable bands = BandTable::eeg();

    json columns = json::array();
    for (Index ch = 0; ch < data.channels; ++ch) {
        for (const Band& b : bands.included()) {
            columns.push_back("ch" + std::to_string(ch) + "_" + b.name);
        }
    }
    json rows = json::array();
    for (std::size_t i = 0; i < labeled.size(); ++i) {
        const Vector f = extract_trial_features(*labeled.trials[i], bands, c.features);
        rows.push_back({{"trial_index", labeled.source_index[i]},
                        {"label", labeled.labels[i]},
                        {"features", std::vector<double>(f.data(), f.data() + f.size())}});
    }
    json j;
    j["config"] = to_json(c);
    j["class_names"] = labeled.class_names;
    j["columns"] = std::move(columns);
    j["trials"] = std::move(rows);
    write_json(out / "features.json", j);
}

void train(const Options& o)
{
    const ExperimentConfig c = load_config(o);
    const fs::path out = require_out(o);
    const LabeledDataset data = load_labeled(c);
    TrainedModel model;
    const EvaluationReport report = run_experiment(c, data, model);
    write_json(out / "report.json", to_json(report));
    write_json(out / "model.json", to_json(model));
    log::info("test accuracy " + std::to_string(report.accuracy));
}

void eval(const Options& o)
{
    if (o.model.empty()) {
        throw ConfigError("--model is required");
    }
    const fs::path out = require_out(o);
    json doc;
    {
        std::ifstream in(o.model);
        if (!in) {
            throw DataError("cannot open model file " + o.model);
        }
        try {
            doc = json::parse(in);
        } catch (const json::parse_error& e) {
            throw DataError("malformed JSON in " + o.model + ": " + e.what());
        }
    }
    const TrainedModel model = model_from_json(doc);
    ExperimentConfig c = model.config;
    if (!o.config.empty()) {
        c.manifest = load_experiment_config(o.config).manifest;
    }
    if (!o.manifest.empty()) {
        c.manifest = o.manifest;
    }
    LabeledDataset data = load_labeled(c);
    if (o.split == "test") {
        data = split_train_test(data, c.train_fraction, c.split_seed).test;
    } else if (o.split != "all") {
        throw ConfigError("--split must be 'test' or 'all'");
    }
    TrainedModel evaluated = model;
    evaluated.config.manifest = c.manifest;
    const EvaluationReport report = evaluate_model(evaluated, data);
    write_json(out / "report.json", to_json(report));
}

void run_sweep(const Options& o)
{
    const ExperimentConfig c = load_config(o);
    if (!c.sweep) {
        throw ConfigError("config has no sweep section");
    }
    const fs::path out = require_out(o);
    if (o.jobs < 1) {
        throw ConfigError("--jobs must be at least 1");
    }
    const LabeledDataset data = load_labeled(c);
    std::vector<std::uint64_t> seeds = c.sweep->seeds;
    if (o.overrides.seed) {
        seeds = {*o.overrides.seed};
    }
    const auto rows = sweep(c, c.sweep->parameter, c.sweep->values, data, seeds, o.jobs);

    write_file(out / "sweep.csv", sweep_csv(rows));
    json reports = json::array();
    for (const SweepRow& r : rows) {
        json entry = to_json(r.report);
        entry.erase("config");
        reports.push_back({{"value", r.value}, {"seed", r.seed}, {"report", std::move(entry)}});
    }
    write_json(out / "sweep.json", {{"config", to_json(c)}, {"parameter", to_string(c.sweep->parameter)},
                                    {"rows", std::move(reports)}});
}

void inspect(const Options& o)
{
    std::string manifest = o.manifest;
    if (manifest.empty() && !o.config.empty()) {
        manifest = load_experiment_config(o.config).manifest;
    }
    if (manifest.empty()) {
        throw ConfigError("--manifest or --config is required");
    }
    const Dataset data = load_dataset(manifest);
    std::ostream& out = std::cout;
    out << "subjects: " << data.subjects.size() << "\n";
    out << "trials: " << data.trial_count() << "\n";
    out << "channels: " << data.channels << "\n";
    out << "samples per trial: " << data.samples_per_trial << "\n";
    out << "sample rate: " << data.sample_rate_hz << " Hz\n";

    if (data.trial_count() > 0) {
        const char* names[] = {"valence", "arousal", "dominance", "liking"};
        double lo[4] = {1e300, 1e300, 1e300, 1e300};
        double hi[4] = {-1e300, -1e300, -1e300, -1e300};
        for (const TrialPtr& t : data.all_trials()) {
            const double v[4] = {t->ratings.valence, t->ratings.arousal, t->ratings.dominance, t->ratings.liking};
            for (int k = 0; k < 4; ++k) {
                lo[k] = std::min(lo[k], v[k]);
                hi[k] = std::max(hi[k], v[k]);
            }
        }
        for (int k = 0; k < 4; ++k) {
            out << names[k] << " range: [" << lo[k] << ", " << hi[k] << "]\n";
        }
    }

    for (SchemeKind kind : {SchemeKind::LAHA, SchemeKind::LVHV, SchemeKind::StressCalm, SchemeKind::EightStates}) {
        const LabelScheme scheme{kind};
        const LabeledDataset labeled = label_dataset(data, scheme);
        out << to_string(kind) << ": " << labeled.size() << " of " << data.trial_count() << " trials labeled\n";
        const auto counts = labeled.class_counts();
        for (std::size_t k = 0; k < counts.size(); ++k) {
            out << "  " << labeled.class_names[k] << ": " << counts[k] << "\n";
        }
    }
}

int exit_code_for(const std::exception& e)
{
    if (dynamic_cast<const NumericalError*>(&e)) {
        return numerical_error;
    }
    if (dynamic_cast<const DataError*>(&e) || dynamic_cast<const DimensionError*>(&e)
        || dynamic_cast<const fs::filesystem_error*>(&e)) {
        return data_error;
    }
    if (dynamic_cast<const std::invalid_argument*>(&e)) {
        return usage_error;
    }
    return numerical_error;
}

} // namespace

int run(int argc, const char* const* argv)
{
    CLI::App app{"Echo state network toolkit for EEG emotion recognition", "esn"};
    app.require_subcommand(1);
    Options o;
    app.add_flag("-v,--verbose", o.verbose, "Log progress to standard error");

    auto add_common = [&](CLI::App* sub, bool experiment) {
        sub->add_option("--config", o.config, "JSON configuration file");
        sub->add_option("--out", o.out, "Output directory");
        sub->add_option("--seed", o.overrides.seed, "Override the seed");
        sub->add_option("--scheme", o.overrides.scheme, "Labeling scheme: LAHA, LVHV, StressCalm, EightStates");
        if (experiment) {
            sub->add_option("--input-mode", o.overrides.input_mode, "signal or feature");
            sub->add_option("--rule", o.overrides.rule, "Plasticity rule: none, oja, bcm, ip");
            sub->add_option("--mode", o.overrides.mode, "Readout mode: offline, online, hybrid");
        }
    };

    std::map<CLI::App*, void (*)(const Options&)> handlers;
    auto* gen = app.add_subcommand("gen-synthetic", "Write a band-coded synthetic dataset");
    add_common(gen, false);
    handlers[gen] = gen_synthetic;

    auto* feat = app.add_subcommand("extract-features", "Write wavelet band-power features of every labeled trial");
    add_common(feat, false);
    handlers[feat] = extract_features;

    auto* tr = app.add_subcommand("train", "Pretrain, train and evaluate; writes report.json and model.json");
    add_common(tr, true);
    handlers[tr] = train;

    auto* ev = app.add_subcommand("eval", "Evaluate a saved model; writes report.json");
    add_common(ev, false);
    ev->add_option("--model", o.model, "model.json written by train")->required();
    ev->add_option("--manifest", o.manifest, "Dataset manifest (default: the model's)");
    ev->add_option("--split", o.split, "test (the model's held-out split) or all")
        ->check(CLI::IsMember({"test", "all"}));
    handlers[ev] = eval;

    auto* sw = app.add_subcommand("sweep", "Run the config's sweep; writes sweep.csv and sweep.json");
    add_common(sw, true);
    sw->add_option("--jobs", o.jobs, "Concurrent runs")->check(CLI::PositiveNumber);
    handlers[sw] = run_sweep;

    auto* ins = app.add_subcommand("inspect", "Summarize a dataset");
    ins->add_option("--manifest", o.manifest, "Dataset manifest");
    ins->add_option("--config", o.config, "Experiment config naming a manifest");
    handlers[ins] = inspect;

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            std::cout << app.help();
            return ok;
        }
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return usage_error;
    }

    log::set_level(o.verbose ? log::Level::info : log::Level::warning);
    for (const auto& [sub, handler] : handlers) {
        if (!sub->parsed()) {
            continue;
        }
        try {
            handler(o);
            return ok;
        } catch (const std::exception& e) {
            log::write(log::Level::error, e.what());
            return exit_code_for(e);
        }
    }
    return usage_error;
}

int run(const std::vector<std::string>& args)
{
    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    return run(static_cast<int>(argv.size()), argv.data());
}

} // namespace esn::cli
