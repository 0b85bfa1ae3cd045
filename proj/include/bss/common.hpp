#pragma once

// Shared basics: error types, binomial coefficients, smooth blending,
// floating-point helpers.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace bss {

// Invalid inputs / specs that fail their structural conditions.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Tolerance not reached, embedding not PSD, series not certified, ...
// Carries the name of the failing operation for CLI exit-code reporting.
class NumericalError : public std::runtime_error {
public:
    NumericalError(std::string operation, const std::string& what)
        : std::runtime_error(operation + ": " + what), operation_(std::move(operation)) {}
    const std::string& operation() const noexcept { return operation_; }

private:
    std::string operation_;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Exact for k <= 60 or so; filters here use k <= 12.
inline double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 0; i < k; ++i) r = r * double(n - i) / double(i + 1);
    return std::round(r);
}

// Alternating binomial filter weights (-1)^j C(k,j), j = 0..k.
inline std::vector<double> filter_weights(int k) {
    std::vector<double> w(static_cast<std::size_t>(k) + 1);
    for (int j = 0; j <= k; ++j) w[static_cast<std::size_t>(j)] = ((j & 1) ? -1.0 : 1.0) * binomial(k, j);
    return w;
}

// C-infinity step: 0 for u<=0, 1 for u>=1, strictly increasing between.
// exp(-1/u) underflows to exactly 0 near the edges, so the blend is
// numerically identical to its endpoint function there.
inline double smooth01(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / u);
    const double b = std::exp(-1.0 / (1.0 - u));
    return a / (a + b);
}

inline bool nearly_equal(double a, double b, double rel, double abs_floor = 0.0) {
    const double d = std::fabs(a - b);
    return d <= abs_floor || d <= rel * std::max(std::fabs(a), std::fabs(b));
}

template <class F>
double apply_filter(F&& f, int k, int v, double delta_n, double x) {
    double acc = 0.0;
    double sign = 1.0;
    for (int j = 0; j <= k; ++j) {
        acc += sign * binomial(k, j) * f(x - double(v) * double(j) * delta_n);
        sign = -sign;
    }
    return acc;
}

} // namespace bss
