#include "esn/errors.hpp"
#include "esn/readout.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace esn;

namespace {

Matrix random_matrix(Index r, Index c, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n;
    Matrix m(r, c);
    for (Index i = 0; i < r; ++i) {
        for (Index j = 0; j < c; ++j) {
            m(i, j) = n(rng);
        }
    }
    return m;
}

std::vector<int> random_labels(Index n, int classes, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> u(0, classes - 1);
    std::vector<int> l(static_cast<std::size_t>(n));
    for (int& v : l) {
        v = u(rng);
    }
    return l;
}

} // namespace

TEST_CASE("one_hot")
{
    const std::vector<int> labels{1, 0, 2};
    const Matrix y = one_hot(labels, 3);
    CHECK(y.rows() == 3);
    CHECK(y.rowwise().sum() == Vector::Ones(3));
    CHECK(y(0, 1) == 1.0);
    CHECK(y(2, 2) == 1.0);
    CHECK_THROWS_AS(one_hot(std::vector<int>{3}, 3), DimensionError);
}

TEST_CASE("offline readout interpolates an identity design")
{
    const std::vector<int> labels{1, 0};
    const TrainingDesign d{Matrix::Identity(2, 2), one_hot(labels, 2), 0.0};
    const ReadoutWeights w = train_offline(d, {"a", "b"});
    CHECK((w.weights - d.targets.transpose()).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((d.states * w.weights.transpose() - d.targets).norm() < 1e-15);
    CHECK(w.class_names == std::vector<std::string>{"a", "b"});
}

TEST_CASE("offline readout matches the normal-equations oracle")
{
    for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
        const Matrix x = random_matrix(50, 10, seed);
        const Matrix y = one_hot(random_labels(50, 3, seed + 10), 3);
        for (double lambda : {0.0, 1e-6, 0.5}) {
            const ReadoutWeights w = train_offline({x, y, lambda}, {});
            const Matrix ref = oracle::normal_equations(x, y, lambda);
            CHECK((w.weights - ref).norm() / ref.norm() < 1e-8);
        }
    }
}

TEST_CASE("ridge shrinks the solution")
{
    const Matrix x = random_matrix(30, 8, 7);
    const Matrix y = one_hot(random_labels(30, 2, 8), 2);
    const double plain = train_offline({x, y, 0.0}, {}).weights.norm();
    const double ridge = train_offline({x, y, 1.0}, {}).weights.norm();
    CHECK(ridge < plain);
}

TEST_CASE("square invertible design is solved to 1e-8 relative residual")
{
    const Matrix x = random_matrix(12, 12, 9);
    const Matrix y = one_hot(random_labels(12, 4, 9), 4);
    const ReadoutWeights w = train_offline({x, y, 0.0}, {});
    CHECK((x * w.weights.transpose() - y).norm() / y.norm() < 1e-8);
}

TEST_CASE("singular design without ridge is reported")
{
    Matrix x = random_matrix(20, 5, 3);
    x.col(4) = x.col(0) * 2.0;
    const Matrix y = one_hot(random_labels(20, 2, 3), 2);
    try {
        train_offline({x, y, 0.0}, {});
        FAIL("expected a numerical error");
    } catch (const NumericalError& e) {
        CHECK(std::string(e.what()).find("ridge") != std::string::npos);
    }
    CHECK_NOTHROW(train_offline({x, y, 1e-3}, {}));
}

TEST_CASE("offline input validation")
{
    const Matrix x = random_matrix(5, 3, 1);
    CHECK_THROWS_AS(train_offline({x, Matrix::Zero(4, 2), 0.1}, {}), DimensionError);
    CHECK_THROWS_AS(train_offline({x.topRows(1), Matrix::Identity(1, 2), 0.1}, {}), DimensionError);
    CHECK_THROWS_AS(train_offline({x, one_hot(std::vector<int>(5, 0), 1), 0.1}, {}), ConfigError);
    CHECK_THROWS_AS(train_offline({x, one_hot(std::vector<int>{0, 1, 0, 1, 0}, 2), -1.0}, {}), ConfigError);
    CHECK_THROWS_AS(train_offline({x, one_hot(std::vector<int>{0, 1, 0, 1, 0}, 2), 0.1}, {"only"}), DimensionError);
    Matrix bad = x;
    bad(0, 0) = std::nan("");
    CHECK_THROWS_AS(train_offline({bad, one_hot(std::vector<int>{0, 1, 0, 1, 0}, 2), 0.1}, {}), NumericalError);
}

TEST_CASE("delta rule single step")
{
    ReadoutWeights w;
    w.weights = Matrix::Zero(1, 2);
    Matrix x(1, 2);
    x << 1.0, 2.0;
    const ReadoutWeights out = train_online(w, x, Matrix::Ones(1, 1), {0.1, 1, false, 0});
    CHECK(out.weights(0, 0) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(out.weights(0, 1) == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("delta rule leaves a perfect predictor alone")
{
    ReadoutWeights w;
    w.weights = random_matrix(2, 4, 5);
    const Matrix x = random_matrix(10, 4, 6);
    const Matrix y = x * w.weights.transpose();
    CHECK(train_online(w, x, y, {0.05, 3, false, 0}).weights == w.weights);
}

TEST_CASE("zero learning rate is the identity")
{
    ReadoutWeights w;
    w.weights = random_matrix(3, 6, 1);
    const Matrix x = random_matrix(20, 6, 2);
    const Matrix y = one_hot(random_labels(20, 3, 3), 3);
    CHECK(train_online(w, x, y, {0.0, 10, true, 4}).weights == w.weights);
}

TEST_CASE("delta rule converges on exactly representable targets")
{
    const Matrix x = random_matrix(40, 6, 11) * 0.5;
    const Matrix truth = random_matrix(2, 6, 12);
    const Matrix y = x * truth.transpose();
    ReadoutWeights w;
    w.weights = Matrix::Zero(2, 6);
    const ReadoutWeights out = train_online(w, x, y, {0.02, 200, false, 0});
    const double mse = (x * out.weights.transpose() - y).squaredNorm() / static_cast<double>(y.size());
    CHECK(mse < 1e-4);
}

TEST_CASE("least-squares solution is a fixed point of the delta rule in expectation")
{
    const Matrix x = random_matrix(60, 8, 21);
    const Matrix y = one_hot(random_labels(60, 3, 22), 3);
    const ReadoutWeights w = train_offline({x, y, 0.0}, {});
    const Matrix mean_update = (y - x * w.weights.transpose()).transpose() * x / 60.0;
    CHECK(mean_update.norm() <= 1e-6);
}

TEST_CASE("online shuffle is seeded")
{
    ReadoutWeights w;
    w.weights = Matrix::Zero(2, 5);
    const Matrix x = random_matrix(30, 5, 1);
    const Matrix y = one_hot(random_labels(30, 2, 2), 2);
    const auto a = train_online(w, x, y, {0.01, 3, true, 9}).weights;
    const auto b = train_online(w, x, y, {0.01, 3, true, 9}).weights;
    const auto c = train_online(w, x, y, {0.01, 3, false, 9}).weights;
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("diverging delta rule is reported")
{
    ReadoutWeights w;
    w.weights = Matrix::Zero(2, 5);
    const Matrix x = random_matrix(30, 5, 1) * 100.0;
    const Matrix y = one_hot(random_labels(30, 2, 2), 2);
    CHECK_THROWS_AS(train_online(w, x, y, {10.0, 50, false, 0}), NumericalError);
    CHECK_THROWS_AS(train_online(w, x, y, {-1.0, 1, false, 0}), ConfigError);
    CHECK_THROWS_AS(train_online(w, x.leftCols(4), y, {0.1, 1, false, 0}), DimensionError);
}

TEST_CASE("hybrid degenerates to offline")
{
    const Matrix x = random_matrix(25, 6, 3);
    const Matrix y = one_hot(random_labels(25, 2, 4), 2);
    const TrainingDesign d{x, y, 1e-3};
    const Matrix offline = train_offline(d, {}).weights;
    CHECK(train_hybrid(d, {0.01, 0, false, 0}, {}).weights == offline);
    CHECK(train_hybrid(d, {0.0, 5, false, 0}, {}).weights == offline);
    CHECK(train_hybrid(d, {0.01, 5, false, 0}, {}).weights != offline);
}

TEST_CASE("winner_take_all")
{
    CHECK(winner_take_all(Vector{{0.2, 0.9, 0.1}}) == 1);
    CHECK(winner_take_all(Vector{{0.5, 0.5}}) == 0);
    CHECK(winner_take_all(Vector{{-0.3}}) == 0);
    const Vector s{{0.1, -2.0, 0.7, 0.69}};
    CHECK(winner_take_all((s.array() + 3.5).matrix()) == 2);
    CHECK(winner_take_all(s * 12.0) == 2);
    CHECK_THROWS(winner_take_all(Vector()));
}

TEST_CASE("majority_vote")
{
    CHECK(majority_vote(std::vector<std::size_t>{0, 0, 1}) == 0);
    std::vector<std::size_t> votes(17, 0);
    votes.insert(votes.end(), 15, 1);
    CHECK(majority_vote(votes) == 0);
    std::vector<std::size_t> tie(16, 1);
    tie.insert(tie.end(), 16, 0);
    CHECK(majority_vote(tie) == 0);
    std::vector<std::size_t> mixed{3, 1, 3, 2, 1, 3, 2};
    std::mt19937_64 rng(1);
    for (int k = 0; k < 10; ++k) {
        std::shuffle(mixed.begin(), mixed.end(), rng);
        CHECK(majority_vote(mixed) == 3);
    }
    CHECK_THROWS(majority_vote(std::vector<std::size_t>{}));
}

TEST_CASE("predict uses the linear scores")
{
    ReadoutWeights w;
    w.weights = Matrix::Identity(3, 3);
    CHECK(w.predict(Vector{{0.0, 0.2, 0.1}}) == 1);
    CHECK(w.scores(Vector{{1.0, 2.0, 3.0}}) == Vector{{1.0, 2.0, 3.0}});
    CHECK_THROWS_AS(w.scores(Vector::Zero(2)), DimensionError);
}
