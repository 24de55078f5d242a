#pragma once

#include "esn/types.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace esn {

/// Self-assessment on the 1-9 scale.
struct Ratings {
    double valence = 5.0;
    double arousal = 5.0;
    double dominance = 5.0;
    double liking = 5.0;

    bool valid() const;
};

/// One recording: channels x samples signal matrix plus its ratings.
struct Trial {
    Eigen::MatrixXf signals;
    Ratings ratings;

    Index channels() const { return signals.rows(); }
    Index samples() const { return signals.cols(); }
    /// One channel as a T x 1 double column, the reservoir's input layout.
    Matrix channel_sequence(Index channel) const;
};

using TrialPtr = std::shared_ptr<const Trial>;

enum class SchemeKind { LAHA, LVHV, StressCalm, EightStates };

struct LabelScheme {
    SchemeKind kind = SchemeKind::LAHA;
    /// Low iff rating < threshold (LAHA, LVHV and each axis of EightStates).
    double threshold = 5.0;

    void validate() const;
    std::vector<std::string> class_names() const;
};

std::string to_string(SchemeKind kind);
SchemeKind scheme_from_string(const std::string& name);

/// Class index of a rating under `scheme`, or nullopt when the scheme
/// leaves the trial unlabeled (only StressCalm does).
///
///  - LAHA / LVHV: 0 = low, 1 = high.
///  - StressCalm: 0 = stress (V <= 3, A >= 5), 1 = calm (4 <= V <= 6, A < 4).
///  - EightStates: rows of the VAD octant table, 4*[V low] + 2*[A high] + [D high]:
///    Protected, Satisfied, Surprised, Happy, Sad, Unconcerned, Frightened, Angry.
std::optional<int> label_trial(const Ratings& ratings, const LabelScheme& scheme);

struct SubjectRecord {
    std::string id;
    std::vector<TrialPtr> trials;
};

/// Every subject shares the declared channel count, rate and trial length.
struct Dataset {
    Index channels = 32;
    int sample_rate_hz = 128;
    Index samples_per_trial = 8064;
    std::vector<SubjectRecord> subjects;

    std::size_t trial_count() const;
    /// Trials in subject-major order; the position is a trial's global index.
    std::vector<TrialPtr> all_trials() const;
};

/// Trials that received a label, with their class and global index.
struct LabeledDataset {
    std::vector<TrialPtr> trials;
    std::vector<int> labels;
    std::vector<std::size_t> source_index;
    std::vector<std::string> class_names;
    LabelScheme scheme;

    std::size_t size() const { return trials.size(); }
    std::vector<std::size_t> class_counts() const;
};

/// Reads a JSON manifest and the raw little-endian float32 files it names.
/// Relative file paths resolve against the manifest's directory.
Dataset load_dataset(const std::filesystem::path& manifest);

/// Writes `manifest.json`, `<id>_data.f32` and `<id>_labels.f32` into `dir`.
/// Returns the manifest path.
std::filesystem::path save_dataset(const Dataset& data, const std::filesystem::path& dir);

LabeledDataset label_dataset(const Dataset& data, const LabelScheme& scheme);

struct TrainTestSplit {
    LabeledDataset train;
    LabeledDataset test;
};

/// Seeded, class-stratified split. Each class contributes
/// round(fraction * n_k) trials to train (at least one trial on each side);
/// both partitions keep a seeded shuffled order.
TrainTestSplit split_train_test(const LabeledDataset& data, double fraction, std::uint64_t seed);

/// Band-coded synthetic benchmark: class k's channels carry a sinusoid at the
/// centre of the k-th of (Alpha, Beta, Theta, Gamma) with random phase plus
/// white noise. Signal power is snr/(1+snr), noise power 1/(1+snr).
struct SyntheticSpec {
    int classes = 2;
    int trials_per_class = 60;
    Index channels = 8;
    Index samples = 1024;
    int rate_hz = 128;
    double snr = 10.0;
    std::uint64_t seed = 1;
    LabelScheme scheme{};

    void validate() const;
};

/// Frequency (Hz) carried by synthetic class `k`.
double synthetic_class_frequency(int k);

Dataset generate_synthetic_dataset(const SyntheticSpec& spec);
LabeledDataset generate_synthetic(const SyntheticSpec& spec);

} // namespace esn
