#include "esn/errors.hpp"
#include "esn/features.hpp"

#include <stdexcept>

namespace esn {

const std::array<double, 10> kDb5Lowpass = {
    0.0033357252854737712, -0.012580751999081999, -0.006241490212798274,
    0.07757149384004572,   -0.032244869584638375, -0.24229488706638203,
    0.13842814590132074,   0.7243085284377729,    0.6038292697971896,
    0.16010239797419293,
};

std::array<double, 10> db5_highpass()
{
    std::array<double, 10> h{};
    constexpr std::size_t n = kDb5Lowpass.size();
    for (std::size_t k = 0; k < n; ++k) {
        const double sign = (k % 2 == 0) ? -1.0 : 1.0;
        h[k] = sign * kDb5Lowpass[n - 1 - k];
    }
    return h;
}

namespace {

// One analysis stage: out[i] = sum_j h[j] x[(2i + L/2 - j) mod N].
void analyze(const Vector& x, const std::array<double, 10>& lo, const std::array<double, 10>& hi,
             Vector& approx, Vector& detail)
{
    const Index n = x.size();
    const Index half = n / 2;
    constexpr Index taps = 10;
    approx.resize(half);
    detail.resize(half);
    for (Index i = 0; i < half; ++i) {
        double a = 0.0;
        double d = 0.0;
        for (Index j = 0; j < taps; ++j) {
            Index idx = (2 * i + taps / 2 - j) % n;
            if (idx < 0) {
                idx += n;
            }
            a += lo[j] * x(idx);
            d += hi[j] * x(idx);
        }
        approx(i) = a;
        detail(i) = d;
    }
}

} // namespace

const Vector& WaveletDecomposition::level(int level) const
{
    if (level == 0) {
        return approximation;
    }
    if (level < 1 || level > static_cast<int>(details.size())) {
        throw std::out_of_range("wavelet level " + std::to_string(level) + " not present");
    }
    return details[static_cast<std::size_t>(level - 1)];
}

WaveletDecomposition dwt_decompose(std::span<const double> signal, int levels)
{
    if (levels < 1) {
        throw ConfigError("dwt_decompose: levels must be positive");
    }
    const Index block = Index{1} << levels;
    const auto length = static_cast<Index>(signal.size());
    if (length < block) {
        throw DimensionError("dwt_decompose: signal of length " + std::to_string(length)
                             + " is shorter than 2^" + std::to_string(levels));
    }
    const Index padded = ((length + block - 1) / block) * block;
    Vector current(padded);
    for (Index i = 0; i < padded; ++i) {
        current(i) = signal[static_cast<std::size_t>(i % length)];
    }

    const auto hi = db5_highpass();
    WaveletDecomposition out;
    out.details.reserve(static_cast<std::size_t>(levels));
    for (int l = 0; l < levels; ++l) {
        Vector approx;
        Vector detail;
        analyze(current, kDb5Lowpass, hi, approx, detail);
        out.details.push_back(std::move(detail));
        current = std::move(approx);
    }
    out.approximation = std::move(current);
    return out;
}

} // namespace esn
