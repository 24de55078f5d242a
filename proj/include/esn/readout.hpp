#pragma once

#include "esn/types.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace esn {

/// Linear decoder from reservoir state to class scores.
struct ReadoutWeights {
    Matrix weights; ///< O x R
    std::vector<std::string> class_names;

    Index classes() const { return weights.rows(); }
    Vector scores(const Vector& state) const;
    std::size_t predict(const Vector& state) const;
};

/// Rows of `states` are pooled reservoir states; rows of `targets` the
/// matching one-hot class vectors.
struct TrainingDesign {
    Matrix states;
    Matrix targets;
    double ridge = 1e-6;
};

struct OnlineOptions {
    double learning_rate = 1e-3;
    int epochs = 20;
    /// Present samples in a freshly shuffled order each epoch instead of the
    /// design's row order.
    bool shuffle = false;
    std::uint64_t seed = 0;
};

Matrix one_hot(std::span<const int> labels, Index classes);

/// Ridge least squares: W = Y^T X (X^T X + ridge I)^-1.
/// With ridge = 0 a singular X^T X raises NumericalError.
ReadoutWeights train_offline(const TrainingDesign& design, std::vector<std::string> class_names);

/// Delta rule: for each sample, W += rate (y_desired - W x) x^T.
ReadoutWeights train_online(ReadoutWeights initial, const Matrix& states, const Matrix& targets,
                            const OnlineOptions& options);

/// train_offline, then train_online starting from its weights.
ReadoutWeights train_hybrid(const TrainingDesign& design, const OnlineOptions& options,
                            std::vector<std::string> class_names);

/// Index of the largest score; ties go to the lowest index.
std::size_t winner_take_all(const Vector& scores);

/// Most frequent label; ties go to the lowest label.
std::size_t majority_vote(std::span<const std::size_t> labels);

} // namespace esn
