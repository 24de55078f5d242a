#include "esn/dataset.hpp"
#include "esn/errors.hpp"
#include "esn/features.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <random>

namespace esn {

namespace {

// Band order used for class coding; the first two give the Alpha/Beta pair.
constexpr std::array<const char*, 4> kClassBands = {"Alpha", "Beta", "Theta", "Gamma"};

// Rejection-samples ratings on the 1-9 grid until `scheme` assigns `label`.
Ratings ratings_for(int label, const LabelScheme& scheme, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> unit(1.0, 9.0);
    for (int attempt = 0; attempt < 100000; ++attempt) {
        Ratings r{unit(rng), unit(rng), unit(rng), unit(rng)};
        // Round-trip through float so stored ratings keep their label.
        r = {double(float(r.valence)), double(float(r.arousal)), double(float(r.dominance)),
             double(float(r.liking))};
        const auto got = label_trial(r, scheme);
        if (got && *got == label) {
            return r;
        }
    }
    throw ConfigError("cannot synthesize ratings for class " + std::to_string(label));
}

} // namespace

double synthetic_class_frequency(int k)
{
    if (k < 0 || k >= static_cast<int>(kClassBands.size())) {
        throw ConfigError("synthetic generator supports at most "
                          + std::to_string(kClassBands.size()) + " band-coded classes");
    }
    return BandTable::eeg().center_hz(kClassBands[static_cast<std::size_t>(k)]);
}

void SyntheticSpec::validate() const
{
    scheme.validate();
    if (classes < 1 || trials_per_class < 1 || channels < 1 || samples < 1 || rate_hz < 1) {
        throw ConfigError("synthetic: counts and rate must be positive");
    }
    if (classes > static_cast<int>(kClassBands.size())) {
        throw ConfigError("synthetic: " + std::to_string(classes) + " classes requested but only "
                          + std::to_string(kClassBands.size()) + " bands are available");
    }
    if (classes > static_cast<int>(scheme.class_names().size())) {
        throw ConfigError("synthetic: scheme " + to_string(scheme.kind) + " has fewer than "
                          + std::to_string(classes) + " classes");
    }
    for (int k = 0; k < classes; ++k) {
        if (2.0 * synthetic_class_frequency(k) >= rate_hz) {
            throw ConfigError("synthetic: class frequency " + std::to_string(synthetic_class_frequency(k))
                              + " Hz is above Nyquist for " + std::to_string(rate_hz) + " Hz");
        }
    }
    if (!(snr >= 0.0) || !std::isfinite(snr)) {
        throw ConfigError("synthetic: snr must be nonnegative and finite");
    }
}

Dataset generate_synthetic_dataset(const SyntheticSpec& spec)
{
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::normal_distribution<double> noise(0.0, 1.0);

    const double amplitude = std::sqrt(2.0 * spec.snr / (1.0 + spec.snr));
    const double noise_std = std::sqrt(1.0 / (1.0 + spec.snr));

    Dataset data;
    data.channels = spec.channels;
    data.sample_rate_hz = spec.rate_hz;
    data.samples_per_trial = spec.samples;
    SubjectRecord subject{"synthetic", {}};

    const int total = spec.classes * spec.trials_per_class;
    for (int n = 0; n < total; ++n) {
        const int label = n % spec.classes;
        const double omega = 2.0 * std::numbers::pi * synthetic_class_frequency(label) / spec.rate_hz;
        auto trial = std::make_shared<Trial>();
        trial->signals.resize(spec.channels, spec.samples);
        for (Index c = 0; c < spec.channels; ++c) {
            const double phi = phase(rng);
            for (Index t = 0; t < spec.samples; ++t) {
                const double v = amplitude * std::sin(omega * static_cast<double>(t) + phi)
                                 + noise_std * noise(rng);
                trial->signals(c, t) = static_cast<float>(v);
            }
        }
        trial->ratings = ratings_for(label, spec.scheme, rng);
        subject.trials.push_back(std::move(trial));
    }
    data.subjects.push_back(std::move(subject));
    return data;
}

LabeledDataset generate_synthetic(const SyntheticSpec& spec)
{
    return label_dataset(generate_synthetic_dataset(spec), spec.scheme);
}

} // namespace esn
