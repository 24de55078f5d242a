#include "esn/spectral.hpp"

#include "esn/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>

namespace esn {

namespace {

constexpr double kRelativeTolerance = 1e-10;
constexpr Index kFirstCheck = 20;
constexpr Index kMaxBasis = 800;
constexpr int kMaxRestarts = 10;

double max_modulus(const Matrix& h)
{
    if (h.rows() == 0) {
        return 0.0;
    }
    Eigen::EigenSolver<Matrix> solver(h, false);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("spectral radius: Hessenberg eigenvalue solve failed");
    }
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

template <typename Apply>
double arnoldi_radius(Index n, Apply&& apply)
{
    if (n == 0) {
        return 0.0;
    }
    const Index basis = std::min(n, kMaxBasis);

    Vector start(n);
    std::mt19937_64 rng(0x5eed5eedULL);
    std::normal_distribution<double> normal;
    for (Index i = 0; i < n; ++i) {
        start(i) = normal(rng);
    }

    double previous = -1.0;
    for (int restart = 0; restart <= kMaxRestarts; ++restart) {
        // Ritz values are checked on a geometric schedule.
        Index next_check = kFirstCheck;
        Matrix q(n, basis + 1);
        Matrix h = Matrix::Zero(basis + 1, basis);
        q.col(0) = start.normalized();

        for (Index j = 0; j < basis; ++j) {
            Vector w = apply(q.col(j));
            const double raw_norm = w.norm();
            // Classical Gram-Schmidt with a second pass when the first one
            // cancelled most of w.
            double beta = raw_norm;
            for (int pass = 0; pass < 2; ++pass) {
                const double before = beta;
                const Vector c = q.leftCols(j + 1).transpose() * w;
                w.noalias() -= q.leftCols(j + 1) * c;
                h.col(j).head(j + 1) += c;
                beta = w.norm();
                if (beta > 0.7 * before) {
                    break;
                }
            }
            h(j + 1, j) = beta;
            const Index steps = j + 1;
            const bool breakdown = beta <= 1e-13 * raw_norm || raw_norm == 0.0;

            if (breakdown || steps == n || steps == next_check || steps == basis) {
                next_check = steps + std::max<Index>(kFirstCheck, steps / 4);
                const double rho = max_modulus(h.topLeftCorner(steps, steps));
                if (breakdown || steps == n) {
                    return rho;
                }
                if (previous >= 0.0 && std::abs(rho - previous) <= kRelativeTolerance * rho) {
                    return rho;
                }
                previous = rho;
            }
            q.col(j + 1) = w / beta;
        }

        // Explicit restart from the dominant Ritz vector (real and imaginary
        // parts folded into one real start vector).
        Eigen::EigenSolver<Matrix> solver(h.topLeftCorner(basis, basis), true);
        Index best = 0;
        solver.eigenvalues().cwiseAbs().maxCoeff(&best);
        const Eigen::VectorXcd y = solver.eigenvectors().col(best);
        start = q.leftCols(basis) * (y.real() + y.imag());
        if (start.norm() == 0.0) {
            break;
        }
    }
    return previous;
}

double checked_target(double target)
{
    if (!std::isfinite(target) || target <= 0.0) {
        throw ConfigError("spectral radius target must be positive and finite");
    }
    return target;
}

double scale_factor(double rho, double target)
{
    if (!(rho > 0.0) || !std::isfinite(rho)) {
        throw NumericalError("cannot rescale: matrix has spectral radius zero");
    }
    return target / rho;
}

} // namespace

double spectral_radius(const Matrix& w)
{
    if (w.rows() != w.cols()) {
        throw_dimension_mismatch("spectral_radius columns", w.rows(), w.cols());
    }
    return arnoldi_radius(w.rows(), [&](const auto& v) -> Vector { return w * v; });
}

double spectral_radius(const SparseMatrix& w)
{
    if (w.rows() != w.cols()) {
        throw_dimension_mismatch("spectral_radius columns", w.rows(), w.cols());
    }
    return arnoldi_radius(w.rows(), [&](const auto& v) -> Vector { return w * v; });
}

Matrix rescale_spectral_radius(const Matrix& w, double target)
{
    checked_target(target);
    return w * scale_factor(spectral_radius(w), target);
}

SparseMatrix rescale_spectral_radius(const SparseMatrix& w, double target)
{
    checked_target(target);
    const double factor = scale_factor(spectral_radius(w), target);
    SparseMatrix out = w;
    for (Index k = 0; k < out.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(out, k); it; ++it) {
            it.valueRef() *= factor;
        }
    }
    return out;
}

} // namespace esn
