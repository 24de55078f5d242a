#include "esn/plasticity.hpp"

#include "esn/errors.hpp"
#include "esn/spectral.hpp"
#include "activation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace esn {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

// P(lo < X < hi) for X ~ N(mean, stddev^2), evaluated on the tail side that
// avoids cancellation.
double normal_mass(double lo, double hi, double mean, double stddev)
{
    const double zl = (lo - mean) / stddev;
    const double zh = (hi - mean) / stddev;
    if (zl >= 0.0) {
        return 0.5 * (std::erfc(zl * kInvSqrt2) - std::erfc(zh * kInvSqrt2));
    }
    if (zh <= 0.0) {
        return 0.5 * (std::erfc(-zh * kInvSqrt2) - std::erfc(-zl * kInvSqrt2));
    }
    return 1.0 - 0.5 * std::erfc(zh * kInvSqrt2) - 0.5 * std::erfc(-zl * kInvSqrt2);
}

void require_finite(const ReservoirWeights& w, const char* rule, int epoch)
{
    if (!w.recurrent.coeffs().allFinite() || !w.gain.allFinite() || !w.bias.allFinite()) {
        throw NumericalError(std::string(rule) + " pretraining produced non-finite weights in epoch "
                             + std::to_string(epoch) + "; lower the learning rate");
    }
}

void check_inputs(const ReservoirWeights& w, std::span<const Matrix> sequences)
{
    w.check_shapes();
    if (sequences.empty()) {
        throw DimensionError("pretrain: no sequences");
    }
    for (const Matrix& s : sequences) {
        if (s.cols() != w.input_dim()) {
            throw_dimension_mismatch("pretrain sequence columns", w.input_dim(), s.cols());
        }
    }
}

void notify(const PretrainOptions& options, int epoch, const ReservoirWeights& w)
{
    if (options.on_epoch) {
        options.on_epoch(epoch, w);
    }
}

// Applies `delta(w_kj, x_j, y_k, k)` to every stored recurrent entry.
template <typename Delta>
void adapt_recurrent(SparseMatrix& recurrent, const Vector& pre, const Vector& post, Delta&& delta)
{
    for (Index k = 0; k < recurrent.outerSize(); ++k) {
        const double y = post(k);
        for (SparseMatrix::InnerIterator it(recurrent, k); it; ++it) {
            it.valueRef() += delta(it.value(), pre(it.col()), y, k);
        }
    }
}

void pretrain_oja(ReservoirWeights& w, std::span<const Matrix> sequences, const OjaConfig& cfg,
                  const PretrainOptions& options)
{
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        for (const Matrix& seq : sequences) {
            Vector x = Vector::Zero(w.size());
            for (Index t = 0; t < seq.rows(); ++t) {
                const Vector y = update_state_ip(w, x, seq.row(t).transpose());
                adapt_recurrent(w.recurrent, x, y, [&](double wkj, double xj, double yk, Index) {
                    return oja_step(wkj, xj, yk, cfg.learning_rate);
                });
                x = y;
            }
            require_finite(w, "Oja", epoch);
        }
        notify(options, epoch, w);
    }
}

void pretrain_bcm(ReservoirWeights& w, std::span<const Matrix> sequences, const BcmConfig& cfg,
                  const PretrainOptions& options)
{
    // Thresholds start at the first observed y^2 and then run continuously
    // across sequences and epochs.
    Vector threshold;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        for (const Matrix& seq : sequences) {
            Vector x = Vector::Zero(w.size());
            for (Index t = 0; t < seq.rows(); ++t) {
                const Vector y = update_state_ip(w, x, seq.row(t).transpose());
                if (threshold.size() == 0) {
                    threshold = y.array().square().max(cfg.threshold_floor).matrix();
                }
                adapt_recurrent(w.recurrent, x, y, [&](double, double xj, double yk, Index k) {
                    return bcm_step(xj, yk, threshold(k), cfg.learning_rate, cfg.threshold_floor);
                });
                for (Index k = 0; k < w.size(); ++k) {
                    threshold(k) =
                        bcm_threshold_update(threshold(k), y(k), cfg.threshold_time_constant);
                }
                x = y;
            }
            require_finite(w, "BCM", epoch);
        }
        notify(options, epoch, w);
    }
}

void pretrain_ip(ReservoirWeights& w, std::span<const Matrix> sequences, const IpConfig& cfg,
                 const PretrainOptions& options)
{
    const double mu = cfg.target_mean;
    const double var = cfg.target_std * cfg.target_std;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        for (const Matrix& seq : sequences) {
            Vector x = Vector::Zero(w.size());
            for (Index t = 0; t < seq.rows(); ++t) {
                const Vector net = net_input(w, x, seq.row(t).transpose());
                Eigen::ArrayXd activation = w.gain.array() * net.array() + w.bias.array();
                detail::tanh_inplace(activation);
                x = activation.matrix();
                const Eigen::ArrayXd db =
                    -cfg.learning_rate
                    * (-mu / var + (activation / var) * (2.0 * var + 1.0 - activation.square() + mu * activation));
                w.gain.array() += cfg.learning_rate / w.gain.array() + db * net.array();
                w.bias.array() += db;
                if (!(w.gain.minCoeff() > 0.0) || !w.gain.allFinite() || !w.bias.allFinite()) {
                    Index i = 0;
                    while (i + 1 < w.size() && w.gain(i) > 0.0 && std::isfinite(w.gain(i))
                           && std::isfinite(w.bias(i))) {
                        ++i;
                    }
                    throw NumericalError("IP pretraining drove the gain of neuron " + std::to_string(i)
                                         + " to " + std::to_string(w.gain(i)) + " in epoch "
                                         + std::to_string(epoch) + "; lower the learning rate");
                }
            }
        }
        notify(options, epoch, w);
    }
}

} // namespace

void validate(const OjaConfig& c)
{
    if (!std::isfinite(c.learning_rate) || c.learning_rate <= 0.0) {
        throw ConfigError("oja: learning_rate must be positive");
    }
    if (c.epochs < 0) {
        throw ConfigError("oja: epochs must be nonnegative");
    }
}

void validate(const BcmConfig& c)
{
    if (!std::isfinite(c.learning_rate) || c.learning_rate <= 0.0) {
        throw ConfigError("bcm: learning_rate must be positive");
    }
    if (!(c.threshold_time_constant >= 1.0) || !std::isfinite(c.threshold_time_constant)) {
        throw ConfigError("bcm: threshold_time_constant must be at least 1");
    }
    if (!(c.threshold_floor > 0.0)) {
        throw ConfigError("bcm: threshold_floor must be positive");
    }
    if (c.epochs < 0) {
        throw ConfigError("bcm: epochs must be nonnegative");
    }
}

void validate(const IpConfig& c)
{
    if (!std::isfinite(c.learning_rate) || c.learning_rate <= 0.0) {
        throw ConfigError("ip: learning_rate must be positive");
    }
    if (!std::isfinite(c.target_std) || c.target_std <= 0.0) {
        throw ConfigError("ip: target_std must be positive");
    }
    if (!std::isfinite(c.target_mean)) {
        throw ConfigError("ip: target_mean must be finite");
    }
    if (c.epochs < 0) {
        throw ConfigError("ip: epochs must be nonnegative");
    }
}

double oja_step(double weight, double pre, double post, double learning_rate)
{
    return learning_rate * post * (pre - post * weight);
}

double bcm_step(double pre, double post, double threshold, double learning_rate, double floor)
{
    const double theta = std::max(threshold, floor);
    return learning_rate * post * (post - theta) * pre / theta;
}

double bcm_threshold_update(double threshold, double post, double time_constant)
{
    return threshold + (post * post - threshold) / time_constant;
}

IpDelta ip_step(double gain, double /*bias*/, double net, double activation, const IpConfig& cfg)
{
    if (!(gain > 0.0)) {
        throw std::invalid_argument("ip_step: gain must be positive");
    }
    const double mu = cfg.target_mean;
    const double var = cfg.target_std * cfg.target_std;
    const double x = activation;
    const double db =
        -cfg.learning_rate * (-mu / var + (x / var) * (2.0 * var + 1.0 - x * x + mu * x));
    const double da = cfg.learning_rate / gain + db * net;
    return {da, db};
}

double kl_to_gaussian(std::span<const double> samples, double mean, double stddev)
{
    if (samples.size() < 100) {
        throw std::invalid_argument("kl_to_gaussian: needs at least 100 samples, got "
                                    + std::to_string(samples.size()));
    }
    if (!(stddev > 0.0) || !std::isfinite(stddev) || !std::isfinite(mean)) {
        throw std::invalid_argument("kl_to_gaussian: stddev must be positive and finite");
    }
    const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
    double lo = *lo_it;
    double hi = *hi_it;
    if (!std::isfinite(lo) || !std::isfinite(hi)) {
        throw std::invalid_argument("kl_to_gaussian: non-finite sample");
    }
    if (hi - lo < 1e-9 * std::max(1.0, std::abs(lo))) {
        const double half = 0.5e-9 * std::max(1.0, std::abs(lo));
        lo -= half;
        hi += half;
    }

    const auto n = samples.size();
    const std::size_t bins =
        std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(std::sqrt(double(n)))), 10, 1000);
    const double width = (hi - lo) / static_cast<double>(bins);
    std::vector<std::size_t> counts(bins, 0);
    for (double s : samples) {
        auto b = static_cast<std::size_t>((s - lo) / width);
        counts[std::min(b, bins - 1)] += 1;
    }

    double kl = 0.0;
    for (std::size_t b = 0; b < bins; ++b) {
        if (counts[b] == 0) {
            continue;
        }
        const double p = static_cast<double>(counts[b]) / static_cast<double>(n);
        const double edge_lo = lo + width * static_cast<double>(b);
        const double edge_hi = (b + 1 == bins) ? hi : edge_lo + width;
        const double q = std::max(normal_mass(edge_lo, edge_hi, mean, stddev), 1e-300);
        kl += p * std::log(p / q);
    }
    return kl;
}

ReservoirWeights pretrain(ReservoirWeights weights, std::span<const Matrix> sequences,
                          const PlasticityRule& rule, const PretrainOptions& options)
{
    check_inputs(weights, sequences);
    std::visit([](const auto& cfg) { validate(cfg); }, rule);
    if (epochs_of(rule) == 0) {
        return weights;
    }

    if (const auto* ip = std::get_if<IpConfig>(&rule)) {
        pretrain_ip(weights, sequences, *ip, options);
        return weights;
    }

    const double target =
        options.spectral_radius > 0.0 ? options.spectral_radius : spectral_radius(weights.recurrent);
    if (const auto* oja = std::get_if<OjaConfig>(&rule)) {
        pretrain_oja(weights, sequences, *oja, options);
    } else {
        pretrain_bcm(weights, sequences, std::get<BcmConfig>(rule), options);
    }
    weights.recurrent = rescale_spectral_radius(weights.recurrent, target);
    return weights;
}

int epochs_of(const PlasticityRule& rule)
{
    return std::visit([](const auto& cfg) { return cfg.epochs; }, rule);
}

void set_epochs(PlasticityRule& rule, int epochs)
{
    std::visit([epochs](auto& cfg) { cfg.epochs = epochs; }, rule);
}

} // namespace esn
