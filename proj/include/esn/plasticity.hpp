#pragma once

#include "esn/reservoir.hpp"
#include "esn/types.hpp"

#include <functional>
#include <span>
#include <variant>
#include <vector>

namespace esn {

/// Oja's Hebbian rule with a forgetting term.
struct OjaConfig {
    double learning_rate = 1e-4;
    int epochs = 100;
};

/// BCM rule with a sliding modification threshold.
struct BcmConfig {
    double learning_rate = 1e-3;
    /// Time constant (in steps) of the running estimate of E[y^2].
    double threshold_time_constant = 100.0;
    int epochs = 100;
    double threshold_floor = 1e-6;
};

/// Gaussian intrinsic plasticity for tanh neurons.
struct IpConfig {
    double learning_rate = 5e-4;
    double target_mean = 0.0;
    double target_std = 0.2;
    int epochs = 10;
};

using PlasticityRule = std::variant<OjaConfig, BcmConfig, IpConfig>;

void validate(const OjaConfig& config);
void validate(const BcmConfig& config);
void validate(const IpConfig& config);

/// xi * y * (x - y * w).
double oja_step(double weight, double pre, double post, double learning_rate);

/// rate * y * (y - theta) * x / theta. Thresholds below `floor` are
/// clamped to it.
double bcm_step(double pre, double post, double threshold, double learning_rate,
                double floor = 1e-6);

/// One step of the exponential moving average theta + (y^2 - theta) / tau.
double bcm_threshold_update(double threshold, double post, double time_constant);

struct IpDelta {
    double gain;
    double bias;
};

/// Gain and bias increments for one neuron given its net input and output.
/// Throws std::invalid_argument if `gain` is not positive.
IpDelta ip_step(double gain, double bias, double net, double activation, const IpConfig& config);

/// Histogram estimate of KL(p || N(mean, stddev^2)), p being the empirical
/// distribution of `samples`. Bin masses of the target are exact normal
/// probabilities, so the estimate stays finite and nonnegative up to rounding.
double kl_to_gaussian(std::span<const double> samples, double mean, double stddev);

/// Called after every completed epoch with the 1-based epoch number.
using EpochObserver = std::function<void(int epoch, const ReservoirWeights& weights)>;

struct PretrainOptions {
    /// Spectral radius W_res is rescaled to after Oja/BCM. Zero keeps the
    /// radius measured on entry.
    double spectral_radius = 0.0;
    EpochObserver on_epoch;
};

/// Unsupervised pretraining over `sequences` (each T x I, started from the
/// zero state). Oja and BCM adapt the nonzero entries of W_res (presynaptic =
/// previous state, postsynaptic = new state) and finish with a spectral
/// rescale; IP adapts gain and bias only.
ReservoirWeights pretrain(ReservoirWeights weights, std::span<const Matrix> sequences,
                          const PlasticityRule& rule, const PretrainOptions& options = {});

int epochs_of(const PlasticityRule& rule);
void set_epochs(PlasticityRule& rule, int epochs);

} // namespace esn
