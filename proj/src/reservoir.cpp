#include "esn/reservoir.hpp"

#include "esn/errors.hpp"
#include "esn/spectral.hpp"
#include "activation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

namespace esn {

namespace {

// Columns advanced together by pooled_states. Keeps a batch of R=2500
// states within a few MB.
constexpr Index kBatch = 64;

void check_step_shapes(const ReservoirWeights& weights, const Vector& state, const Vector& input)
{
    if (state.size() != weights.size()) {
        throw_dimension_mismatch("reservoir state length", weights.size(), state.size());
    }
    if (input.size() != weights.input_dim()) {
        throw_dimension_mismatch("input length", weights.input_dim(), input.size());
    }
}

void check_sequence(const ReservoirWeights& weights, const Matrix& inputs)
{
    if (inputs.cols() != weights.input_dim()) {
        throw_dimension_mismatch("input sequence columns", weights.input_dim(), inputs.cols());
    }
}

// W_res x with independent partial sums per row; the single accumulator chain
// of a plain CSR loop is latency bound.
void recurrent_product(const SparseMatrix& m, const Vector& x, Vector& out)
{
    const double* values = m.valuePtr();
    const auto* cols = m.innerIndexPtr();
    const auto* outer = m.outerIndexPtr();
    const double* xs = x.data();
    for (Index i = 0; i < m.rows(); ++i) {
        auto k = outer[i];
        const auto end = outer[i + 1];
        double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
        for (; k + 4 <= end; k += 4) {
            s0 += values[k] * xs[cols[k]];
            s1 += values[k + 1] * xs[cols[k + 1]];
            s2 += values[k + 2] * xs[cols[k + 2]];
            s3 += values[k + 3] * xs[cols[k + 3]];
        }
        for (; k < end; ++k) {
            s0 += values[k] * xs[cols[k]];
        }
        out(i) += (s0 + s1) + (s2 + s3);
    }
}

// Advances a batch of states one step. States are stored B x R so that each
// neuron's batch column is contiguous; `inputs` is B x I.
void step_batch(const ReservoirWeights& weights, const Matrix& inputs, const Matrix& states,
                Matrix& next)
{
    const Index batch = states.rows();
    const Index inputs_n = weights.input_dim();
    std::vector<double> acc(static_cast<std::size_t>(batch));

    for (Index i = 0; i < weights.size(); ++i) {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (Index k = 0; k < inputs_n; ++k) {
            const double w = weights.input(i, k);
            const double* u = inputs.col(k).data();
            for (Index b = 0; b < batch; ++b) {
                acc[b] += w * u[b];
            }
        }
        for (SparseMatrix::InnerIterator it(weights.recurrent, i); it; ++it) {
            const double w = it.value();
            const double* x = states.col(it.col()).data();
            for (Index b = 0; b < batch; ++b) {
                acc[b] += w * x[b];
            }
        }
        const double a = weights.gain(i);
        const double c = weights.bias(i);
        double* out = next.col(i).data();
        for (Index b = 0; b < batch; ++b) {
            out[b] = a * acc[b] + c;
        }
    }
    auto activation = next.array();
    detail::tanh_inplace(activation);
}

} // namespace

void ReservoirConfig::validate() const
{
    if (input_dim < 1) {
        throw ConfigError("reservoir: input_dim must be positive");
    }
    if (reservoir_size < 1) {
        throw ConfigError("reservoir: reservoir_size must be positive");
    }
    if (output_dim < 1) {
        throw ConfigError("reservoir: output_dim must be positive");
    }
    if (!std::isfinite(spectral_radius) || spectral_radius <= 0.0) {
        throw ConfigError("reservoir: spectral_radius must be positive and finite");
    }
    if (!std::isfinite(input_scaling) || input_scaling <= 0.0) {
        throw ConfigError("reservoir: input_scaling must be positive and finite");
    }
    if (!(connectivity > 0.0 && connectivity <= 1.0)) {
        throw ConfigError("reservoir: connectivity must lie in (0, 1]");
    }
    if (washout < 0) {
        throw ConfigError("reservoir: washout must be nonnegative");
    }
}

void ReservoirWeights::check_shapes() const
{
    const Index r = recurrent.rows();
    if (recurrent.cols() != r) {
        throw_dimension_mismatch("recurrent matrix columns", r, recurrent.cols());
    }
    if (input.rows() != r) {
        throw_dimension_mismatch("input matrix rows", r, input.rows());
    }
    if (gain.size() != r) {
        throw_dimension_mismatch("gain length", r, gain.size());
    }
    if (bias.size() != r) {
        throw_dimension_mismatch("bias length", r, bias.size());
    }
}

ReservoirWeights init_reservoir(const ReservoirConfig& config)
{
    config.validate();
    const Index r = config.reservoir_size;
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> coin(0.0, 1.0);

    ReservoirWeights w;
    w.input.resize(r, config.input_dim);
    for (Index i = 0; i < r; ++i) {
        for (Index k = 0; k < config.input_dim; ++k) {
            w.input(i, k) = config.input_scaling * unit(rng);
        }
    }

    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(static_cast<std::size_t>(
        std::ceil(config.connectivity * static_cast<double>(r) * static_cast<double>(r))));
    for (Index i = 0; i < r; ++i) {
        for (Index j = 0; j < r; ++j) {
            if (config.connectivity >= 1.0 || coin(rng) < config.connectivity) {
                entries.emplace_back(i, j, unit(rng));
            }
        }
    }
    SparseMatrix raw(r, r);
    raw.setFromTriplets(entries.begin(), entries.end());
    raw.makeCompressed();

    w.recurrent = rescale_spectral_radius(raw, config.spectral_radius);
    w.gain = Vector::Ones(r);
    w.bias = Vector::Zero(r);
    return w;
}

Vector net_input(const ReservoirWeights& weights, const Vector& state, const Vector& input)
{
    check_step_shapes(weights, state, input);
    Vector net = weights.input * input;
    if (weights.recurrent.isCompressed()) {
        recurrent_product(weights.recurrent, state, net);
    } else {
        net.noalias() += weights.recurrent * state;
    }
    return net;
}

Vector update_state(const ReservoirWeights& weights, const Vector& state, const Vector& input)
{
    Eigen::ArrayXd x = net_input(weights, state, input).array();
    detail::tanh_inplace(x);
    return x.matrix();
}

Vector update_state_ip(const ReservoirWeights& weights, const Vector& state, const Vector& input)
{
    Eigen::ArrayXd x = weights.gain.array() * net_input(weights, state, input).array() + weights.bias.array();
    detail::tanh_inplace(x);
    return x.matrix();
}

StateMatrix run_sequence(const ReservoirWeights& weights, const Matrix& inputs, Index washout)
{
    check_sequence(weights, inputs);
    const Index steps = inputs.rows();
    if (washout < 0 || steps <= washout) {
        throw DimensionError("run_sequence: sequence length " + std::to_string(steps)
                             + " must exceed washout " + std::to_string(washout));
    }
    StateMatrix out;
    out.states.resize(steps - washout, weights.size());
    Vector x = Vector::Zero(weights.size());
    for (Index t = 0; t < steps; ++t) {
        x = update_state_ip(weights, x, inputs.row(t).transpose());
        if (t >= washout) {
            out.states.row(t - washout) = x.transpose();
        }
    }
    out.pooled = out.states.colwise().mean().transpose();
    return out;
}

Matrix pooled_states(const ReservoirWeights& weights, std::span<const Matrix> sequences,
                     Index washout)
{
    weights.check_shapes();
    const Index r = weights.size();
    const Index count = static_cast<Index>(sequences.size());
    Matrix pooled(count, r);

    std::vector<Index> order(sequences.size());
    std::iota(order.begin(), order.end(), Index{0});
    for (const Matrix& seq : sequences) {
        check_sequence(weights, seq);
        if (washout < 0 || seq.rows() <= washout) {
            throw DimensionError("pooled_states: sequence length " + std::to_string(seq.rows())
                                 + " must exceed washout " + std::to_string(washout));
        }
    }
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        return sequences[a].rows() < sequences[b].rows();
    });

    Index begin = 0;
    while (begin < count) {
        const Index steps = sequences[order[begin]].rows();
        Index end = begin;
        while (end < count && end - begin < kBatch && sequences[order[end]].rows() == steps) {
            ++end;
        }
        const Index batch = end - begin;
        Matrix states = Matrix::Zero(batch, r);
        Matrix next(batch, r);
        Matrix sum = Matrix::Zero(batch, r);
        Matrix step_inputs(batch, weights.input_dim());
        for (Index t = 0; t < steps; ++t) {
            for (Index b = 0; b < batch; ++b) {
                step_inputs.row(b) = sequences[order[begin + b]].row(t);
            }
            step_batch(weights, step_inputs, states, next);
            states.swap(next);
            if (t >= washout) {
                sum += states;
            }
        }
        const double harvested = static_cast<double>(steps - washout);
        for (Index b = 0; b < batch; ++b) {
            pooled.row(order[begin + b]) = sum.row(b) / harvested;
        }
        begin = end;
    }
    return pooled;
}

double esp_divergence(const ReservoirWeights& weights, const Matrix& inputs, std::uint64_t seed)
{
    check_sequence(weights, inputs);
    if (inputs.rows() < 2) {
        throw DimensionError("esp_divergence: needs at least 2 steps");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Vector x(weights.size());
    Vector y(weights.size());
    do {
        for (Index i = 0; i < weights.size(); ++i) {
            x(i) = unit(rng);
            y(i) = unit(rng);
        }
    } while (x == y);

    for (Index t = 0; t < inputs.rows(); ++t) {
        const Vector u = inputs.row(t).transpose();
        x = update_state_ip(weights, x, u);
        y = update_state_ip(weights, y, u);
    }
    return (x - y).norm();
}

} // namespace esn
