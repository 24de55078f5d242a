#include "esn/pipeline.hpp"

#include "esn/errors.hpp"
#include "esn/log.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <thread>

namespace esn {

namespace {

// Sequences harvested per pooled_states call; bounds memory on long trials.
constexpr std::size_t kHarvestChunk = 64;
constexpr std::uint64_t kPretrainStream = 0x9E3779B97F4A7C15ULL;

template <typename Enum, std::size_t N>
Enum enum_from(const std::string& name, const std::array<Enum, N>& all, const char* what)
{
    for (Enum e : all) {
        if (to_string(e) == name) {
            return e;
        }
    }
    std::string expected;
    for (Enum e : all) {
        expected += (expected.empty() ? "" : ", ") + to_string(e);
    }
    throw ConfigError(std::string("unknown ") + what + " '" + name + "' (expected " + expected + ")");
}

// Pooled states of every trial, trial-major; each trial contributes
// `encoding.sequences(trial).size()` consecutive rows.
Matrix harvest(const ReservoirWeights& weights, std::span<const TrialPtr> trials,
               const InputEncoding& encoding)
{
    std::vector<Matrix> rows;
    std::vector<Matrix> chunk;
    Index total = 0;
    auto flush = [&] {
        if (!chunk.empty()) {
            rows.push_back(pooled_states(weights, chunk, encoding.harvest_washout()));
            total += rows.back().rows();
            chunk.clear();
        }
    };
    for (const TrialPtr& trial : trials) {
        auto seqs = encoding.sequences(*trial);
        for (auto& s : seqs) {
            chunk.push_back(std::move(s));
        }
        if (chunk.size() >= kHarvestChunk) {
            flush();
        }
    }
    flush();

    Matrix out(total, weights.size());
    Index at = 0;
    for (const Matrix& block : rows) {
        out.middleRows(at, block.rows()) = block;
        at += block.rows();
    }
    return out;
}

struct PretrainSet {
    std::vector<Matrix> sequences;
    std::vector<std::size_t> source_index;
};

PretrainSet pretrain_sequences(const LabeledDataset& train, const InputEncoding& encoding,
                               std::size_t max_sequences, std::uint64_t seed)
{
    // (trial, sequence) candidates in dataset order.
    std::vector<std::pair<std::size_t, std::size_t>> candidates;
    for (std::size_t t = 0; t < train.size(); ++t) {
        const std::size_t per_trial =
            encoding.mode == InputMode::signal ? static_cast<std::size_t>(train.trials[t]->channels()) : 1;
        for (std::size_t s = 0; s < per_trial; ++s) {
            candidates.emplace_back(t, s);
        }
    }
    if (max_sequences > 0 && max_sequences < candidates.size()) {
        std::mt19937_64 rng(seed ^ kPretrainStream);
        std::shuffle(candidates.begin(), candidates.end(), rng);
        candidates.resize(max_sequences);
        std::sort(candidates.begin(), candidates.end());
    }

    PretrainSet out;
    std::set<std::size_t> sources;
    for (const auto& [t, s] : candidates) {
        const Trial& trial = *train.trials[t];
        if (encoding.mode == InputMode::signal) {
            out.sequences.push_back(trial.channel_sequence(static_cast<Index>(s)));
        } else {
            out.sequences.push_back(std::move(encoding.sequences(trial).front()));
        }
        sources.insert(train.source_index[t]);
    }
    out.source_index.assign(sources.begin(), sources.end());
    return out;
}

std::vector<int> expand_labels(const std::vector<int>& labels, Index rows_per_trial)
{
    std::vector<int> out;
    out.reserve(labels.size() * static_cast<std::size_t>(rows_per_trial));
    for (int l : labels) {
        out.insert(out.end(), static_cast<std::size_t>(rows_per_trial), l);
    }
    return out;
}

std::size_t decide(const Matrix& rows, const ReadoutWeights& readout, InputMode mode,
                   std::vector<std::size_t>* votes_out = nullptr)
{
    std::vector<std::size_t> votes;
    votes.reserve(static_cast<std::size_t>(rows.rows()));
    for (Index r = 0; r < rows.rows(); ++r) {
        votes.push_back(readout.predict(rows.row(r).transpose()));
    }
    if (votes_out) {
        *votes_out = votes;
    }
    if (mode == InputMode::feature) {
        return votes.front();
    }
    return majority_vote(votes);
}

double elapsed_since(std::chrono::steady_clock::time_point start)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

ExperimentConfig apply_sweep_value(ExperimentConfig config, SweepParameter parameter, double value)
{
    switch (parameter) {
    case SweepParameter::spectral_radius:
        config.reservoir.spectral_radius = value;
        break;
    case SweepParameter::reservoir_size: {
        const auto size = static_cast<Index>(std::llround(value));
        if (size < 1 || std::abs(value - static_cast<double>(size)) > 1e-9) {
            throw ConfigError("reservoir_size sweep values must be positive integers");
        }
        config.reservoir.reservoir_size = size;
        break;
    }
    case SweepParameter::plasticity_epochs: {
        if (!config.plasticity.rule) {
            throw ConfigError("plasticity_epochs sweep needs a plasticity rule");
        }
        const auto epochs = static_cast<int>(std::llround(value));
        if (epochs < 0 || std::abs(value - epochs) > 1e-9) {
            throw ConfigError("plasticity_epochs sweep values must be nonnegative integers");
        }
        set_epochs(*config.plasticity.rule, epochs);
        break;
    }
    }
    return config;
}

} // namespace

std::string to_string(ReadoutMode mode)
{
    switch (mode) {
    case ReadoutMode::offline:
        return "offline";
    case ReadoutMode::online:
        return "online";
    case ReadoutMode::hybrid:
        return "hybrid";
    }
    return "hybrid";
}

std::string to_string(InputMode mode)
{
    return mode == InputMode::signal ? "signal" : "feature";
}

std::string to_string(SweepParameter parameter)
{
    switch (parameter) {
    case SweepParameter::spectral_radius:
        return "spectral_radius";
    case SweepParameter::reservoir_size:
        return "reservoir_size";
    case SweepParameter::plasticity_epochs:
        return "plasticity_epochs";
    }
    return "spectral_radius";
}

ReadoutMode readout_mode_from_string(const std::string& name)
{
    return enum_from(name,
                     std::array{ReadoutMode::offline, ReadoutMode::online, ReadoutMode::hybrid},
                     "readout mode");
}

InputMode input_mode_from_string(const std::string& name)
{
    return enum_from(name, std::array{InputMode::signal, InputMode::feature}, "input mode");
}

SweepParameter sweep_parameter_from_string(const std::string& name)
{
    return enum_from(name,
                     std::array{SweepParameter::spectral_radius, SweepParameter::reservoir_size,
                                SweepParameter::plasticity_epochs},
                     "sweep parameter");
}

Index InputEncoding::input_dim(Index channels) const
{
    if (mode == InputMode::signal) {
        return 1;
    }
    return channels * static_cast<Index>(bands.included().size());
}

Index InputEncoding::harvest_washout() const
{
    return mode == InputMode::signal ? washout : 0;
}

std::vector<Matrix> InputEncoding::sequences(const Trial& trial) const
{
    std::vector<Matrix> out;
    if (mode == InputMode::signal) {
        out.reserve(static_cast<std::size_t>(trial.channels()));
        for (Index c = 0; c < trial.channels(); ++c) {
            out.push_back(trial.channel_sequence(c));
        }
        return out;
    }
    out.push_back(feature_drive(trial).transpose().replicate(drive_steps, 1));
    return out;
}

Vector InputEncoding::feature_drive(const Trial& trial) const
{
    Vector f = extract_trial_features(trial, bands, features);
    if (feature_mean.size() == 0) {
        return f;
    }
    if (feature_mean.size() != f.size() || feature_scale.size() != f.size()) {
        throw DimensionError("feature standardization has " + std::to_string(feature_mean.size())
                             + " columns but the trial yields " + std::to_string(f.size()));
    }
    return ((f - feature_mean).array() / feature_scale.array()).matrix();
}

InputEncoding fit_feature_scaling(InputEncoding encoding, const LabeledDataset& train)
{
    encoding.feature_mean.resize(0);
    encoding.feature_scale.resize(0);
    if (encoding.mode != InputMode::feature || train.size() == 0) {
        return encoding;
    }
    Matrix f(static_cast<Index>(train.size()), 0);
    for (std::size_t i = 0; i < train.size(); ++i) {
        const Vector row = encoding.feature_drive(*train.trials[i]);
        if (i == 0) {
            f.resize(static_cast<Index>(train.size()), row.size());
        }
        f.row(static_cast<Index>(i)) = row.transpose();
    }
    const Vector mean = f.colwise().mean().transpose();
    const Matrix centered = f.rowwise() - mean.transpose();
    Vector scale = (centered.colwise().squaredNorm() / static_cast<double>(f.rows())).cwiseSqrt().transpose();
    for (Index k = 0; k < scale.size(); ++k) {
        if (!(scale(k) > 1e-12)) {
            scale(k) = 1.0;
        }
    }
    scale *= std::sqrt(static_cast<double>(scale.size()));
    encoding.feature_mean = mean;
    encoding.feature_scale = scale;
    return encoding;
}

void ExperimentConfig::validate() const
{
    ReservoirConfig r = reservoir;
    r.input_dim = std::max<Index>(r.input_dim, 1);
    r.output_dim = std::max<Index>(r.output_dim, 1);
    r.validate();
    if (plasticity.rule) {
        std::visit([](const auto& c) { esn::validate(c); }, *plasticity.rule);
    }
    if (!(readout.learning_rate >= 0.0) || !std::isfinite(readout.learning_rate)) {
        throw ConfigError("readout: learning_rate must be nonnegative");
    }
    if (readout.epochs < 0) {
        throw ConfigError("readout: epochs must be nonnegative");
    }
    if (!(readout.ridge >= 0.0) || !std::isfinite(readout.ridge)) {
        throw ConfigError("readout: ridge must be nonnegative");
    }
    scheme.validate();
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ConfigError("split: train_fraction must lie in (0, 1)");
    }
    if (features.levels < 1) {
        throw ConfigError("features: levels must be positive");
    }
    if (feature_drive_steps < 1) {
        throw ConfigError("features: drive_steps must be positive");
    }
}

InputEncoding ExperimentConfig::encoding() const
{
    InputEncoding e;
    e.mode = input_mode;
    e.washout = reservoir.washout;
    e.drive_steps = feature_drive_steps;
    e.features = features;
    return e;
}

ExperimentConfig with_seed(ExperimentConfig config, std::uint64_t seed)
{
    config.reservoir.seed = seed;
    config.split_seed = seed;
    return config;
}

PreparedExperiment prepare_experiment(const ExperimentConfig& config, const LabeledDataset& data)
{
    config.validate();
    if (data.size() == 0) {
        throw DataError("dataset has no labeled trials");
    }
    const Index channels = data.trials.front()->channels();
    for (const TrialPtr& t : data.trials) {
        if (t->channels() != channels) {
            throw DataError("trials disagree on channel count");
        }
    }

    PreparedExperiment p;
    p.config = config;
    const InputEncoding encoding = config.encoding();
    const Index input_dim = encoding.input_dim(channels);
    const auto classes = static_cast<Index>(data.class_names.size());
    if (config.reservoir.input_dim > 1 && config.reservoir.input_dim != input_dim) {
        throw ConfigError("reservoir.input_dim " + std::to_string(config.reservoir.input_dim)
                          + " disagrees with " + to_string(config.input_mode) + " input of size "
                          + std::to_string(input_dim));
    }
    p.config.reservoir.input_dim = input_dim;
    p.config.reservoir.output_dim = classes;
    p.rows_per_trial = config.input_mode == InputMode::signal ? channels : 1;

    if (config.reservoir.spectral_radius >= 1.0) {
        log::warning("spectral radius " + std::to_string(config.reservoir.spectral_radius)
                     + " >= 1: echo state property not guaranteed");
    }

    p.split = split_train_test(data, config.train_fraction, config.split_seed);
    p.encoding = fit_feature_scaling(encoding, p.split.train);
    p.weights = init_reservoir(p.config.reservoir);

    if (config.plasticity.rule) {
        PretrainSet set = pretrain_sequences(p.split.train, p.encoding, config.plasticity.max_sequences,
                                             config.reservoir.seed);
        PretrainOptions options;
        options.spectral_radius = p.config.reservoir.spectral_radius;
        options.on_epoch = [](int epoch, const ReservoirWeights&) {
            log::write(log::Level::debug, "pretraining epoch " + std::to_string(epoch) + " done");
        };
        p.weights = pretrain(std::move(p.weights), set.sequences, *config.plasticity.rule, options);
        p.pretrain_index = std::move(set.source_index);
    }

    p.train.states = harvest(p.weights, p.split.train.trials, p.encoding);
    p.train.targets = one_hot(expand_labels(p.split.train.labels, p.rows_per_trial), classes);
    p.train.ridge = config.readout.ridge;
    p.test_states = harvest(p.weights, p.split.test.trials, p.encoding);
    return p;
}

ReadoutWeights train_readout(const TrainingDesign& design, const ReadoutSettings& settings,
                             std::vector<std::string> class_names, std::uint64_t seed)
{
    const OnlineOptions online{settings.learning_rate, settings.epochs, settings.shuffle, seed};
    switch (settings.mode) {
    case ReadoutMode::offline:
        return train_offline(design, std::move(class_names));
    case ReadoutMode::online: {
        ReadoutWeights start;
        start.weights = Matrix::Zero(design.targets.cols(), design.states.cols());
        start.class_names = std::move(class_names);
        return train_online(std::move(start), design.states, design.targets, online);
    }
    case ReadoutMode::hybrid:
        return train_hybrid(design, online, std::move(class_names));
    }
    throw ConfigError("unknown readout mode");
}

EvaluationReport evaluate(const PreparedExperiment& p, const ReadoutWeights& readout)
{
    const auto classes = p.split.test.class_names.size();
    EvaluationReport report;
    report.config = p.config;
    report.class_names = p.split.test.class_names;
    report.confusion.assign(classes, std::vector<std::size_t>(classes, 0));
    report.train_index = p.split.train.source_index;
    report.test_index = p.split.test.source_index;
    report.pretrain_index = p.pretrain_index;
    report.spectral_radius_warning = p.config.reservoir.spectral_radius >= 1.0;

    const bool signal = p.config.input_mode == InputMode::signal;
    std::vector<std::size_t> channel_hits(static_cast<std::size_t>(signal ? p.rows_per_trial : 0), 0);
    std::size_t correct = 0;
    const std::size_t n = p.split.test.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Matrix rows = p.test_states.middleRows(static_cast<Index>(i) * p.rows_per_trial,
                                                     p.rows_per_trial);
        std::vector<std::size_t> votes;
        const std::size_t predicted = decide(rows, readout, p.config.input_mode, &votes);
        const auto truth = static_cast<std::size_t>(p.split.test.labels[i]);
        report.confusion[truth][predicted] += 1;
        correct += predicted == truth ? 1 : 0;
        for (std::size_t c = 0; c < channel_hits.size(); ++c) {
            channel_hits[c] += votes[c] == truth ? 1 : 0;
        }
    }
    report.accuracy = n == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(n);
    if (signal && n > 0) {
        std::size_t hits = 0;
        for (std::size_t h : channel_hits) {
            report.per_channel_accuracy.push_back(static_cast<double>(h) / static_cast<double>(n));
            hits += h;
        }
        report.channel_accuracy =
            static_cast<double>(hits) / static_cast<double>(n * channel_hits.size());
    }
    return report;
}

std::size_t classify_trial(const ReservoirWeights& weights, const ReadoutWeights& readout,
                           const Trial& trial, const InputEncoding& encoding)
{
    if (readout.weights.size() == 0) {
        throw ConfigError("classify_trial: readout is untrained");
    }
    const auto seqs = encoding.sequences(trial);
    const Matrix pooled = pooled_states(weights, seqs, encoding.harvest_washout());
    return decide(pooled, readout, encoding.mode);
}

EvaluationReport run_experiment(const ExperimentConfig& config, const LabeledDataset& data,
                                TrainedModel& model)
{
    const auto start = std::chrono::steady_clock::now();
    PreparedExperiment p = prepare_experiment(config, data);
    ReadoutWeights readout =
        train_readout(p.train, config.readout, data.class_names, config.split_seed);
    EvaluationReport report = evaluate(p, readout);
    report.wall_time_s = elapsed_since(start);
    model.config = p.config;
    model.encoding = p.encoding;
    model.weights = std::move(p.weights);
    model.readout = std::move(readout);
    return report;
}

EvaluationReport run_experiment(const ExperimentConfig& config, const LabeledDataset& data)
{
    TrainedModel model;
    return run_experiment(config, data, model);
}

EvaluationReport evaluate_model(const TrainedModel& model, const LabeledDataset& data)
{
    const auto start = std::chrono::steady_clock::now();
    model.weights.check_shapes();
    PreparedExperiment p;
    p.config = model.config;
    p.encoding = model.encoding;
    p.weights = model.weights;
    p.split.test = data;
    p.split.train.class_names = data.class_names;
    const InputEncoding& encoding = model.encoding;
    if (data.size() > 0) {
        const Index channels = data.trials.front()->channels();
        if (encoding.input_dim(channels) != model.weights.input_dim()) {
            throw DataError("model expects input size " + std::to_string(model.weights.input_dim())
                            + " but the data provides " + std::to_string(encoding.input_dim(channels)));
        }
        p.rows_per_trial = model.config.input_mode == InputMode::signal ? channels : 1;
    }
    p.test_states = harvest(model.weights, data.trials, encoding);
    EvaluationReport report = evaluate(p, model.readout);
    report.train_index.clear();
    report.wall_time_s = elapsed_since(start);
    return report;
}

std::vector<SweepRow> sweep(const ExperimentConfig& config, SweepParameter parameter,
                            std::span<const double> values, const LabeledDataset& data,
                            std::span<const std::uint64_t> seeds, int jobs)
{
    if (values.empty()) {
        throw ConfigError("sweep: no values");
    }
    std::vector<SweepRow> rows;
    std::vector<ExperimentConfig> configs;
    for (double v : values) {
        const ExperimentConfig base = apply_sweep_value(config, parameter, v);
        if (seeds.empty()) {
            rows.push_back({v, base.reservoir.seed, {}});
            configs.push_back(base);
        } else {
            for (std::uint64_t s : seeds) {
                rows.push_back({v, s, {}});
                configs.push_back(with_seed(base, s));
            }
        }
    }

    std::vector<std::exception_ptr> errors(rows.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < rows.size(); i = next++) {
            try {
                rows[i].report = run_experiment(configs[i], data);
                log::info(to_string(parameter) + "=" + std::to_string(rows[i].value) + " seed="
                          + std::to_string(rows[i].seed)
                          + " accuracy=" + std::to_string(rows[i].report.accuracy));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const auto threads = static_cast<std::size_t>(std::clamp(jobs, 1, static_cast<int>(rows.size())));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    return rows;
}

} // namespace esn
