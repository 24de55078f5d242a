#include "esn/readout.hpp"

#include "esn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

namespace esn {

namespace {

void check_design(const Matrix& states, const Matrix& targets)
{
    if (states.rows() != targets.rows()) {
        throw_dimension_mismatch("design target rows", states.rows(), targets.rows());
    }
    if (!states.allFinite()) {
        throw NumericalError("readout design contains non-finite states");
    }
}

void check_names(const std::vector<std::string>& names, Index classes)
{
    if (classes < 2) {
        throw ConfigError("readout needs at least two classes");
    }
    if (!names.empty() && static_cast<Index>(names.size()) != classes) {
        throw_dimension_mismatch("class name count", classes, static_cast<long>(names.size()));
    }
}

} // namespace

Vector ReadoutWeights::scores(const Vector& state) const
{
    if (state.size() != weights.cols()) {
        throw_dimension_mismatch("readout input length", weights.cols(), state.size());
    }
    return weights * state;
}

std::size_t ReadoutWeights::predict(const Vector& state) const
{
    return winner_take_all(scores(state));
}

Matrix one_hot(std::span<const int> labels, Index classes)
{
    Matrix y = Matrix::Zero(static_cast<Index>(labels.size()), classes);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= classes) {
            throw DimensionError("label " + std::to_string(labels[i]) + " outside [0, "
                                 + std::to_string(classes) + ")");
        }
        y(static_cast<Index>(i), labels[i]) = 1.0;
    }
    return y;
}

ReadoutWeights train_offline(const TrainingDesign& design, std::vector<std::string> class_names)
{
    check_design(design.states, design.targets);
    const Index classes = design.targets.cols();
    check_names(class_names, classes);
    if (design.states.rows() < classes) {
        throw DimensionError("train_offline: need at least as many samples as classes");
    }
    if (!(design.ridge >= 0.0) || !std::isfinite(design.ridge)) {
        throw ConfigError("ridge must be nonnegative");
    }

    const Matrix& x = design.states;
    Matrix gram = x.transpose() * x;
    gram.diagonal().array() += design.ridge;
    const Matrix rhs = x.transpose() * design.targets;

    Eigen::LDLT<Matrix> ldlt(gram);
    const bool singular = ldlt.info() != Eigen::Success || !ldlt.isPositive()
                          || ldlt.rcond() < 1e-14;
    if (singular) {
        throw NumericalError(design.ridge == 0.0
                                 ? "X^T X is singular; use a ridge coefficient > 0"
                                 : "regularized normal equations are singular; increase ridge");
    }
    ReadoutWeights out;
    out.weights = ldlt.solve(rhs).transpose();
    if (!out.weights.allFinite()) {
        throw NumericalError("offline readout produced non-finite weights");
    }
    out.class_names = std::move(class_names);
    return out;
}

ReadoutWeights train_online(ReadoutWeights w, const Matrix& states, const Matrix& targets,
                            const OnlineOptions& options)
{
    check_design(states, targets);
    if (states.cols() != w.weights.cols()) {
        throw_dimension_mismatch("online state length", w.weights.cols(), states.cols());
    }
    if (targets.cols() != w.weights.rows()) {
        throw_dimension_mismatch("online target length", w.weights.rows(), targets.cols());
    }
    if (!(options.learning_rate >= 0.0) || !std::isfinite(options.learning_rate)) {
        throw ConfigError("online learning rate must be nonnegative");
    }
    if (options.epochs < 0) {
        throw ConfigError("online epochs must be nonnegative");
    }

    std::vector<Index> order(static_cast<std::size_t>(states.rows()));
    std::iota(order.begin(), order.end(), Index{0});
    std::mt19937_64 rng(options.seed);

    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        if (options.shuffle) {
            std::shuffle(order.begin(), order.end(), rng);
        }
        for (Index row : order) {
            const auto x = states.row(row).transpose();
            const Vector error = targets.row(row).transpose() - w.weights * x;
            w.weights.noalias() += options.learning_rate * error * x.transpose();
        }
        if (!w.weights.allFinite()) {
            throw NumericalError("delta rule diverged in epoch " + std::to_string(epoch + 1)
                                 + "; learning rate too large");
        }
    }
    return w;
}

ReadoutWeights train_hybrid(const TrainingDesign& design, const OnlineOptions& options,
                            std::vector<std::string> class_names)
{
    ReadoutWeights start = train_offline(design, std::move(class_names));
    return train_online(std::move(start), design.states, design.targets, options);
}

std::size_t winner_take_all(const Vector& scores)
{
    if (scores.size() == 0) {
        throw std::invalid_argument("winner_take_all: empty score vector");
    }
    if (!scores.allFinite()) {
        throw NumericalError("winner_take_all: non-finite score");
    }
    Index best = 0;
    for (Index i = 1; i < scores.size(); ++i) {
        if (scores(i) > scores(best)) {
            best = i;
        }
    }
    return static_cast<std::size_t>(best);
}

std::size_t majority_vote(std::span<const std::size_t> labels)
{
    if (labels.empty()) {
        throw std::invalid_argument("majority_vote: no votes");
    }
    std::map<std::size_t, std::size_t> tally;
    for (std::size_t label : labels) {
        ++tally[label];
    }
    std::size_t best = tally.begin()->first;
    std::size_t most = 0;
    for (const auto& [label, count] : tally) {
        if (count > most) {
            best = label;
            most = count;
        }
    }
    return best;
}

} // namespace esn
