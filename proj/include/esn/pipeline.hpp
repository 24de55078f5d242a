#pragma once

#include "esn/dataset.hpp"
#include "esn/features.hpp"
#include "esn/plasticity.hpp"
#include "esn/readout.hpp"
#include "esn/reservoir.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace esn {

enum class ReadoutMode { offline, online, hybrid };
enum class InputMode { signal, feature };
enum class SweepParameter { spectral_radius, reservoir_size, plasticity_epochs };

std::string to_string(ReadoutMode mode);
std::string to_string(InputMode mode);
std::string to_string(SweepParameter parameter);
ReadoutMode readout_mode_from_string(const std::string& name);
InputMode input_mode_from_string(const std::string& name);
SweepParameter sweep_parameter_from_string(const std::string& name);

struct PlasticitySettings {
    /// Empty: no pretraining.
    std::optional<PlasticityRule> rule;
    /// Pretrain on at most this many sequences, drawn by seed from the train
    /// split (0 = all of them).
    std::size_t max_sequences = 0;
};

struct ReadoutSettings {
    ReadoutMode mode = ReadoutMode::hybrid;
    double learning_rate = 1e-3;
    int epochs = 20;
    double ridge = 1e-6;
    bool shuffle = false;
};

/// How a trial is presented to the reservoir.
struct InputEncoding {
    InputMode mode = InputMode::signal;
    /// Signal mode discards this many leading steps of each channel.
    Index washout = 100;
    /// Feature mode repeats the static feature vector this many steps.
    int drive_steps = 10;
    FeatureOptions features{};
    BandTable bands = BandTable::eeg();
    /// Feature mode drives with (f - feature_mean) / feature_scale when these
    /// are set; both are fitted on the train split.
    Vector feature_mean;
    Vector feature_scale;

    /// Reservoir input dimension for trials with `channels` channels.
    Index input_dim(Index channels) const;
    /// Washout applied when harvesting (0 in feature mode).
    Index harvest_washout() const;
    /// One T x I sequence per channel (signal) or a single drive (feature).
    std::vector<Matrix> sequences(const Trial& trial) const;
    /// Raw or standardized feature vector of one trial.
    Vector feature_drive(const Trial& trial) const;
};

/// Copy of `encoding` whose feature standardization is fitted on `train`:
/// columns are centred and scaled to variance 1/d over the train trials, so
/// the d-dimensional drive has unit total variance. Constant columns are only
/// centred. Signal mode encodings are returned unchanged.
InputEncoding fit_feature_scaling(InputEncoding encoding, const LabeledDataset& train);

struct SweepSettings {
    SweepParameter parameter = SweepParameter::spectral_radius;
    std::vector<double> values;
    std::vector<std::uint64_t> seeds;
};

/// Complete record of one run; echoed into every output artifact.
struct ExperimentConfig {
    std::string manifest;
    /// input_dim and output_dim are filled in from the data.
    ReservoirConfig reservoir{};
    PlasticitySettings plasticity{};
    ReadoutSettings readout{};
    InputMode input_mode = InputMode::signal;
    LabelScheme scheme{};
    double train_fraction = 0.8;
    std::uint64_t split_seed = 7;
    FeatureOptions features{};
    int feature_drive_steps = 10;
    std::optional<SweepSettings> sweep;

    void validate() const;
    InputEncoding encoding() const;
};

/// Sets the reservoir and split seeds together.
ExperimentConfig with_seed(ExperimentConfig config, std::uint64_t seed);

struct EvaluationReport {
    double accuracy = 0.0;
    /// confusion[true][predicted]
    std::vector<std::vector<std::size_t>> confusion;
    std::vector<std::string> class_names;
    /// Signal mode: fraction of correct channel votes, overall and per channel.
    std::optional<double> channel_accuracy;
    std::vector<double> per_channel_accuracy;
    std::vector<std::size_t> train_index;
    std::vector<std::size_t> test_index;
    std::vector<std::size_t> pretrain_index;
    /// Set when the configured spectral radius is >= 1.
    bool spectral_radius_warning = false;
    ExperimentConfig config;
    double wall_time_s = 0.0;
};

/// Everything up to readout training: split, pretrained reservoir and the
/// pooled-state designs for both partitions.
struct PreparedExperiment {
    ExperimentConfig config;
    InputEncoding encoding;
    TrainTestSplit split;
    ReservoirWeights weights;
    std::vector<std::size_t> pretrain_index;
    TrainingDesign train;
    Matrix test_states;
    /// Design rows per trial: channel count in signal mode, 1 in feature mode.
    Index rows_per_trial = 1;
};

PreparedExperiment prepare_experiment(const ExperimentConfig& config, const LabeledDataset& data);

ReadoutWeights train_readout(const TrainingDesign& design, const ReadoutSettings& settings,
                             std::vector<std::string> class_names, std::uint64_t seed = 0);

/// Classifies the prepared test partition with `readout`.
EvaluationReport evaluate(const PreparedExperiment& prepared, const ReadoutWeights& readout);

/// Winner-take-all per channel then a majority vote (signal mode), or a single
/// winner-take-all on the feature drive (feature mode).
std::size_t classify_trial(const ReservoirWeights& weights, const ReadoutWeights& readout,
                           const Trial& trial, const InputEncoding& encoding);

/// Split, pretrain, harvest, train and evaluate.
EvaluationReport run_experiment(const ExperimentConfig& config, const LabeledDataset& data);

struct TrainedModel {
    ExperimentConfig config;
    InputEncoding encoding;
    ReservoirWeights weights;
    ReadoutWeights readout;
};

/// run_experiment that also hands back the trained system.
EvaluationReport run_experiment(const ExperimentConfig& config, const LabeledDataset& data,
                                TrainedModel& model);

/// Classifies every trial of `data` with a trained model.
EvaluationReport evaluate_model(const TrainedModel& model, const LabeledDataset& data);

struct SweepRow {
    double value = 0.0;
    std::uint64_t seed = 0;
    EvaluationReport report;
};

/// One run per (value, seed), rows ordered by value then seed. An empty
/// `seeds` list runs the configuration's own seeds once. Up to `jobs` runs
/// execute concurrently.
std::vector<SweepRow> sweep(const ExperimentConfig& config, SweepParameter parameter,
                            std::span<const double> values, const LabeledDataset& data,
                            std::span<const std::uint64_t> seeds = {}, int jobs = 1);

} // namespace esn
