#pragma once

#include "esn/types.hpp"

#include <cstdint>
#include <span>

namespace esn {

/// Reservoir topology and construction parameters.
struct ReservoirConfig {
    Index input_dim = 1;
    Index reservoir_size = 2500;
    Index output_dim = 2;
    double spectral_radius = 0.85;
    /// W_in entries are drawn from U[-input_scaling, input_scaling].
    double input_scaling = 1.0;
    /// Fraction of nonzero recurrent entries.
    double connectivity = 0.1;
    /// Leading steps discarded before states are harvested.
    Index washout = 100;
    std::uint64_t seed = 42;

    /// Throws ConfigError on the first violated invariant.
    void validate() const;
};

/// The adapted network: input/recurrent weights and per-neuron gain and bias.
///
/// Gain and bias are only changed by intrinsic plasticity; without it they
/// stay at 1 and 0 and the update reduces to the plain tanh reservoir.
struct ReservoirWeights {
    Matrix input;           ///< R x I
    SparseMatrix recurrent; ///< R x R
    Vector gain;            ///< R, strictly positive
    Vector bias;            ///< R

    Index size() const { return recurrent.rows(); }
    Index input_dim() const { return input.cols(); }

    /// Throws DimensionError if the four members disagree on R.
    void check_shapes() const;
};

/// Harvested post-washout states (one row per step) and their time mean.
struct StateMatrix {
    Matrix states;
    Vector pooled;
};

ReservoirWeights init_reservoir(const ReservoirConfig& config);

/// W_in u + W_res x.
Vector net_input(const ReservoirWeights& weights, const Vector& state, const Vector& input);

/// tanh(W_in u + W_res x); ignores gain and bias.
Vector update_state(const ReservoirWeights& weights, const Vector& state, const Vector& input);

/// tanh(diag(a)(W_in u + W_res x) + b).
Vector update_state_ip(const ReservoirWeights& weights, const Vector& state, const Vector& input);

/// Drives the reservoir from the zero state over `inputs` (T x I) and keeps
/// the rows after `washout`. Requires T > washout.
StateMatrix run_sequence(const ReservoirWeights& weights, const Matrix& inputs, Index washout);

/// Pooled (time-mean, post-washout) state for each sequence; row k belongs to
/// `sequences[k]`. Equal-length sequences are advanced together as a batch,
/// which is much faster than calling run_sequence in a loop but yields the
/// same pooled states up to rounding.
Matrix pooled_states(const ReservoirWeights& weights, std::span<const Matrix> sequences,
                     Index washout);

/// Runs `inputs` from two distinct random initial states and returns the
/// Euclidean distance between the final states.
double esp_divergence(const ReservoirWeights& weights, const Matrix& inputs,
                      std::uint64_t seed = 1);

} // namespace esn
