#pragma once

#include "esn/types.hpp"

#include <array>
#include <span>
#include <string>
#include <vector>

namespace esn {

struct Trial;

/// Daubechies-5 analysis low-pass filter (10 taps, sum sqrt(2)).
extern const std::array<double, 10> kDb5Lowpass;
/// Quadrature mirror of kDb5Lowpass: h1[k] = (-1)^(k+1) h0[9-k].
std::array<double, 10> db5_highpass();

/// Mallat decomposition with periodic extension.
struct WaveletDecomposition {
    std::vector<Vector> details; ///< D1 (finest) ... D_levels
    Vector approximation;        ///< A_levels

    /// Coefficients of decomposition level `level` (1-based detail), or the
    /// approximation when `level == 0`.
    const Vector& level(int level) const;
};

/// Multilevel db5 decomposition. Signals whose length is not a multiple of
/// 2^levels are right-padded by periodic repetition first.
WaveletDecomposition dwt_decompose(std::span<const double> signal, int levels = 5);

enum class PowerMeasure { mean_square, sum_square, log_mean_square };

/// Mean of squared coefficients (or the chosen variant).
double band_power(std::span<const double> coefficients,
                  PowerMeasure measure = PowerMeasure::mean_square);

struct Band {
    std::string name;
    double low_hz;  ///< nominal edges at 256 Hz sampling
    double high_hz;
    int level;      ///< detail level D<level>; 0 means the final approximation
    bool included;
};

/// EEG band <-> wavelet-level assignment. Only `included` bands contribute
/// features: Gamma (D2), Beta (D3), Alpha (D4), Theta (D5) in that order.
struct BandTable {
    std::vector<Band> bands;

    static BandTable eeg();
    std::vector<Band> included() const;
    double center_hz(const std::string& name) const;
};

struct FeatureOptions {
    int levels = 5;
    PowerMeasure measure = PowerMeasure::mean_square;
};

/// Band powers of every channel, channel-major: [ch0 bands..., ch1 bands...].
Vector extract_trial_features(const Trial& trial, const BandTable& bands,
                              const FeatureOptions& options = {});

std::string to_string(PowerMeasure measure);
PowerMeasure power_measure_from_string(const std::string& name);

} // namespace esn
