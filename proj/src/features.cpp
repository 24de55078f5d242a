#include "esn/features.hpp"

#include "esn/dataset.hpp"
#include "esn/errors.hpp"

#include <cmath>
#include <vector>

namespace esn {

double band_power(std::span<const double> coefficients, PowerMeasure measure)
{
    if (coefficients.empty()) {
        throw std::invalid_argument("band_power: no coefficients");
    }
    double sum = 0.0;
    for (double c : coefficients) {
        sum += c * c;
    }
    const double mean = sum / static_cast<double>(coefficients.size());
    switch (measure) {
    case PowerMeasure::mean_square:
        return mean;
    case PowerMeasure::sum_square:
        return sum;
    case PowerMeasure::log_mean_square:
        return std::log1p(mean);
    }
    return mean;
}

BandTable BandTable::eeg()
{
    return BandTable{{
        {"Noise", 64.0, 128.0, 1, false},
        {"Gamma", 32.0, 64.0, 2, true},
        {"Beta", 16.0, 32.0, 3, true},
        {"Alpha", 8.0, 16.0, 4, true},
        {"Theta", 4.0, 8.0, 5, true},
        {"Delta", 1.0, 4.0, 0, false},
    }};
}

std::vector<Band> BandTable::included() const
{
    std::vector<Band> out;
    for (const Band& b : bands) {
        if (b.included) {
            out.push_back(b);
        }
    }
    return out;
}

double BandTable::center_hz(const std::string& name) const
{
    for (const Band& b : bands) {
        if (b.name == name) {
            return 0.5 * (b.low_hz + b.high_hz);
        }
    }
    throw std::out_of_range("unknown band " + name);
}

Vector extract_trial_features(const Trial& trial, const BandTable& table,
                              const FeatureOptions& options)
{
    if (trial.channels() == 0) {
        throw DimensionError("extract_trial_features: trial has no channels");
    }
    const std::vector<Band> bands = table.included();
    for (const Band& b : bands) {
        if (b.level > options.levels) {
            throw ConfigError("band " + b.name + " needs level " + std::to_string(b.level)
                              + " but only " + std::to_string(options.levels) + " are computed");
        }
    }

    const auto per_channel = static_cast<Index>(bands.size());
    Vector features(trial.channels() * per_channel);
    std::vector<double> signal(static_cast<std::size_t>(trial.samples()));
    for (Index ch = 0; ch < trial.channels(); ++ch) {
        for (Index t = 0; t < trial.samples(); ++t) {
            signal[static_cast<std::size_t>(t)] = trial.signals(ch, t);
        }
        const WaveletDecomposition dec = dwt_decompose(signal, options.levels);
        for (Index b = 0; b < per_channel; ++b) {
            const Vector& c = dec.level(bands[static_cast<std::size_t>(b)].level);
            features(ch * per_channel + b) =
                band_power(std::span<const double>(c.data(), static_cast<std::size_t>(c.size())),
                           options.measure);
        }
    }
    return features;
}

std::string to_string(PowerMeasure measure)
{
    switch (measure) {
    case PowerMeasure::mean_square:
        return "mean_square";
    case PowerMeasure::sum_square:
        return "sum_square";
    case PowerMeasure::log_mean_square:
        return "log_mean_square";
    }
    return "mean_square";
}

PowerMeasure power_measure_from_string(const std::string& name)
{
    if (name == "mean_square") {
        return PowerMeasure::mean_square;
    }
    if (name == "sum_square") {
        return PowerMeasure::sum_square;
    }
    if (name == "log_mean_square") {
        return PowerMeasure::log_mean_square;
    }
    throw ConfigError("unknown power measure '" + name
                      + "' (expected mean_square, sum_square or log_mean_square)");
}

} // namespace esn
