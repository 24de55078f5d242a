#include "esn/config_io.hpp"

#include "esn/errors.hpp"
#include "json_util.hpp"

#include <fstream>

namespace esn {

using detail::check_keys;
using detail::json;
using detail::optional;
using detail::required;

namespace {

template <typename T>
void non_negative(const json& obj, const char* key, const std::string& ctx, T& target)
{
    optional(obj, key, ctx, target);
    if (target < 0) {
        throw ConfigError(ctx + ": '" + key + "' must be nonnegative");
    }
}

void positive_epochs(int epochs, const std::string& ctx)
{
    if (epochs < 1) {
        throw ConfigError(ctx + ": epochs must be at least 1");
    }
}

ReservoirConfig reservoir_from_json(const json& j)
{
    const std::string ctx = "reservoir";
    check_keys(j, {"size", "spectral_radius", "input_scaling", "connectivity", "washout", "seed", "input_dim"},
               ctx);
    ReservoirConfig r;
    optional(j, "size", ctx, r.reservoir_size);
    optional(j, "spectral_radius", ctx, r.spectral_radius);
    optional(j, "input_scaling", ctx, r.input_scaling);
    optional(j, "connectivity", ctx, r.connectivity);
    non_negative(j, "washout", ctx, r.washout);
    optional(j, "seed", ctx, r.seed);
    optional(j, "input_dim", ctx, r.input_dim);
    return r;
}

PlasticitySettings plasticity_from_json(const json& j)
{
    const std::string ctx = "plasticity";
    if (!j.is_object()) {
        throw ConfigError(ctx + ": expected a JSON object");
    }
    PlasticitySettings p;
    const auto name = required<std::string>(j, "rule", ctx);
    if (name == "none") {
        check_keys(j, {"rule"}, ctx);
        return p;
    }
    p.rule = plasticity_rule_from_name(name);
    std::visit(
        [&](auto& cfg) {
            using T = std::decay_t<decltype(cfg)>;
            if constexpr (std::is_same_v<T, OjaConfig>) {
                check_keys(j, {"rule", "learning_rate", "epochs", "max_sequences"}, ctx);
            } else if constexpr (std::is_same_v<T, BcmConfig>) {
                check_keys(j,
                           {"rule", "learning_rate", "epochs", "max_sequences",
                            "threshold_time_constant", "threshold_floor"},
                           ctx);
                optional(j, "threshold_time_constant", ctx, cfg.threshold_time_constant);
                optional(j, "threshold_floor", ctx, cfg.threshold_floor);
            } else {
                check_keys(j, {"rule", "learning_rate", "epochs", "max_sequences", "target_mean", "target_std"},
                           ctx);
                optional(j, "target_mean", ctx, cfg.target_mean);
                optional(j, "target_std", ctx, cfg.target_std);
            }
            optional(j, "learning_rate", ctx, cfg.learning_rate);
            optional(j, "epochs", ctx, cfg.epochs);
            positive_epochs(cfg.epochs, ctx);
            validate(cfg);
        },
        *p.rule);
    non_negative(j, "max_sequences", ctx, p.max_sequences);
    return p;
}

ReadoutSettings readout_from_json(const json& j)
{
    const std::string ctx = "readout";
    check_keys(j, {"mode", "learning_rate", "epochs", "ridge", "shuffle"}, ctx);
    ReadoutSettings r;
    if (j.contains("mode")) {
        r.mode = readout_mode_from_string(required<std::string>(j, "mode", ctx));
    }
    optional(j, "learning_rate", ctx, r.learning_rate);
    optional(j, "epochs", ctx, r.epochs);
    optional(j, "ridge", ctx, r.ridge);
    optional(j, "shuffle", ctx, r.shuffle);
    return r;
}

LabelScheme scheme_from_json(const json& j, const std::string& ctx)
{
    check_keys(j, {"name", "threshold"}, ctx);
    LabelScheme s;
    if (j.contains("name")) {
        s.kind = scheme_from_string(required<std::string>(j, "name", ctx));
    }
    optional(j, "threshold", ctx, s.threshold);
    s.validate();
    return s;
}

json scheme_to_json(const LabelScheme& s)
{
    return {{"name", to_string(s.kind)}, {"threshold", s.threshold}};
}

json plasticity_to_json(const PlasticitySettings& p)
{
    json j;
    j["rule"] = plasticity_rule_name(p.rule);
    if (!p.rule) {
        return j;
    }
    std::visit(
        [&](const auto& cfg) {
            using T = std::decay_t<decltype(cfg)>;
            j["learning_rate"] = cfg.learning_rate;
            j["epochs"] = cfg.epochs;
            if constexpr (std::is_same_v<T, BcmConfig>) {
                j["threshold_time_constant"] = cfg.threshold_time_constant;
                j["threshold_floor"] = cfg.threshold_floor;
            } else if constexpr (std::is_same_v<T, IpConfig>) {
                j["target_mean"] = cfg.target_mean;
                j["target_std"] = cfg.target_std;
            }
        },
        *p.rule);
    j["max_sequences"] = p.max_sequences;
    return j;
}

} // namespace

std::optional<PlasticityRule> plasticity_rule_from_name(const std::string& name)
{
    if (name == "none") {
        return std::nullopt;
    }
    if (name == "oja") {
        return OjaConfig{};
    }
    if (name == "bcm") {
        return BcmConfig{};
    }
    if (name == "ip") {
        return IpConfig{};
    }
    throw ConfigError("unknown plasticity rule '" + name + "' (expected none, oja, bcm, ip)");
}

std::string plasticity_rule_name(const std::optional<PlasticityRule>& rule)
{
    if (!rule) {
        return "none";
    }
    static const char* names[] = {"oja", "bcm", "ip"};
    return names[rule->index()];
}

ExperimentConfig experiment_config_from_json(const json& j)
{
    check_keys(j, {"dataset", "reservoir", "plasticity", "readout", "input_mode", "scheme", "split", "features", "sweep"},
               "config");
    ExperimentConfig c;
    if (j.contains("dataset")) {
        const json& d = j.at("dataset");
        check_keys(d, {"manifest"}, "dataset");
        optional(d, "manifest", "dataset", c.manifest);
    }
    if (j.contains("reservoir")) {
        c.reservoir = reservoir_from_json(j.at("reservoir"));
    }
    if (j.contains("plasticity")) {
        c.plasticity = plasticity_from_json(j.at("plasticity"));
    }
    if (j.contains("readout")) {
        c.readout = readout_from_json(j.at("readout"));
    }
    if (j.contains("input_mode")) {
        c.input_mode = input_mode_from_string(required<std::string>(j, "input_mode", "config"));
    }
    if (j.contains("scheme")) {
        c.scheme = scheme_from_json(j.at("scheme"), "scheme");
    }
    if (j.contains("split")) {
        const json& s = j.at("split");
        check_keys(s, {"train_fraction", "seed"}, "split");
        optional(s, "train_fraction", "split", c.train_fraction);
        optional(s, "seed", "split", c.split_seed);
    }
    if (j.contains("features")) {
        const json& f = j.at("features");
        check_keys(f, {"levels", "power", "drive_steps"}, "features");
        optional(f, "levels", "features", c.features.levels);
        if (f.contains("power")) {
            c.features.measure = power_measure_from_string(required<std::string>(f, "power", "features"));
        }
        optional(f, "drive_steps", "features", c.feature_drive_steps);
    }
    if (j.contains("sweep")) {
        const json& s = j.at("sweep");
        check_keys(s, {"parameter", "values", "seeds"}, "sweep");
        SweepSettings sw;
        sw.parameter = sweep_parameter_from_string(required<std::string>(s, "parameter", "sweep"));
        sw.values = required<std::vector<double>>(s, "values", "sweep");
        optional(s, "seeds", "sweep", sw.seeds);
        if (sw.values.empty()) {
            throw ConfigError("sweep: values must be nonempty");
        }
        c.sweep = std::move(sw);
    }
    c.validate();
    return c;
}

json to_json(const ExperimentConfig& c)
{
    json j;
    j["dataset"] = {{"manifest", c.manifest}};
    j["reservoir"] = {{"size", c.reservoir.reservoir_size},
                      {"spectral_radius", c.reservoir.spectral_radius},
                      {"input_scaling", c.reservoir.input_scaling},
                      {"connectivity", c.reservoir.connectivity},
                      {"washout", c.reservoir.washout},
                      {"seed", c.reservoir.seed},
                      {"input_dim", c.reservoir.input_dim}};
    j["plasticity"] = plasticity_to_json(c.plasticity);
    j["readout"] = {{"mode", to_string(c.readout.mode)},
                    {"learning_rate", c.readout.learning_rate},
                    {"epochs", c.readout.epochs},
                    {"ridge", c.readout.ridge},
                    {"shuffle", c.readout.shuffle}};
    j["input_mode"] = to_string(c.input_mode);
    j["scheme"] = scheme_to_json(c.scheme);
    j["split"] = {{"train_fraction", c.train_fraction}, {"seed", c.split_seed}};
    j["features"] = {{"levels", c.features.levels},
                     {"power", to_string(c.features.measure)},
                     {"drive_steps", c.feature_drive_steps}};
    if (c.sweep) {
        j["sweep"] = {{"parameter", to_string(c.sweep->parameter)},
                      {"values", c.sweep->values},
                      {"seeds", c.sweep->seeds}};
    }
    return j;
}

json read_config_json(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path)
{
    ExperimentConfig c = experiment_config_from_json(read_config_json(path));
    if (!c.manifest.empty()) {
        const std::filesystem::path m(c.manifest);
        if (m.is_relative()) {
            c.manifest = (path.parent_path() / m).lexically_normal().string();
        }
    }
    return c;
}

SyntheticSpec synthetic_spec_from_json(const json& j)
{
    const std::string ctx = "synthetic";
    check_keys(j, {"classes", "trials_per_class", "channels", "samples", "rate_hz", "snr", "seed", "scheme"}, ctx);
    SyntheticSpec s;
    optional(j, "classes", ctx, s.classes);
    optional(j, "trials_per_class", ctx, s.trials_per_class);
    optional(j, "channels", ctx, s.channels);
    optional(j, "samples", ctx, s.samples);
    optional(j, "rate_hz", ctx, s.rate_hz);
    optional(j, "snr", ctx, s.snr);
    optional(j, "seed", ctx, s.seed);
    if (j.contains("scheme")) {
        s.scheme = scheme_from_json(j.at("scheme"), "synthetic.scheme");
    }
    s.validate();
    return s;
}

json to_json(const SyntheticSpec& s)
{
    return {{"classes", s.classes}, {"trials_per_class", s.trials_per_class},
            {"channels", s.channels}, {"samples", s.samples},
            {"rate_hz", s.rate_hz}, {"snr", s.snr},
            {"seed", s.seed}, {"scheme", scheme_to_json(s.scheme)}};
}

SyntheticSpec load_synthetic_spec(const std::filesystem::path& path)
{
    return synthetic_spec_from_json(read_config_json(path));
}

} // namespace esn
