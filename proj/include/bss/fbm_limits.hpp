#pragma once

// Fractional-Brownian-motion filter correlations rho_k^{v1,v2}(j) and the
// 2x2 asymptotic covariance matrix Lambda_k of the joint two-frequency
// central limit theorem. Everything reduces, by self-similarity, to the
// unit-step covariance of k-th order binomial filters of B^H.

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <tuple>
#include <vector>

#include "bss/common.hpp"

namespace bss {

// 1/2 (|s|^{2H} + |t|^{2H} - |t-s|^{2H})
inline double fbm_cov(double hurst, double s, double t) {
    if (!(hurst > 0.0) || !(hurst < 1.0))
        throw ValidationError("Hurst parameter must lie in (0,1)");
    const double h2 = 2.0 * hurst;
    return 0.5 * (std::pow(std::fabs(s), h2) + std::pow(std::fabs(t), h2) -
                  std::pow(std::fabs(t - s), h2));
}

namespace detail {

// cov(D_{i,k}^{v1} B^H, D_{i+j,k}^{v2} B^H) at unit step; the marginal
// |.|^{2H} terms cancel under the filters, leaving the cross part.
inline double fbm_filter_cov(double hurst, int k, int v1, int v2, double lag) {
    const double h2 = 2.0 * hurst;
    double acc = 0.0;
    for (int a = 0; a <= k; ++a) {
        const double wa = (((a % 2) != 0) ? -1.0 : 1.0) * binomial(k, a);
        for (int b = 0; b <= k; ++b) {
            const double wb = (((b % 2) != 0) ? -1.0 : 1.0) * binomial(k, b);
            acc += wa * wb * std::pow(std::fabs(lag - double(v2) * b + double(v1) * a), h2);
        }
    }
    return -0.5 * acc;
}

} // namespace detail

// Var(D_{i,k}^{v} B^H) at unit observation step: the paper's hat-tau at
// v Delta = v (scales as (v Delta)^{2H} by self-similarity).
inline double fbm_filter_variance(double hurst, int k, int v) {
    if (!(hurst > 0.0) || !(hurst < 1.0))
        throw ValidationError("Hurst parameter must lie in (0,1)");
    if (k < 1) throw ValidationError("filter order must be >= 1");
    return detail::fbm_filter_cov(hurst, k, v, v, 0.0);
}

// corr(D_{i,k}^{v1} B^H, D_{i+j,k}^{v2} B^H), integer lag j, unit step
inline double rho(double hurst, int k, int v1, int v2, long j) {
    if (!(hurst > 0.0) || !(hurst < 1.0))
        throw ValidationError("Hurst parameter must lie in (0,1)");
    if (k < 1) throw ValidationError("filter order must be >= 1");
    if ((v1 != 1 && v1 != 2) || (v2 != 1 && v2 != 2))
        throw ValidationError("frequency multipliers must be 1 or 2");
    if (j == 0 && v1 == v2) return 1.0;
    const double c = detail::fbm_filter_cov(hurst, k, v1, v2, double(j));
    return c / std::sqrt(detail::fbm_filter_cov(hurst, k, v1, v1, 0.0) *
                         detail::fbm_filter_cov(hurst, k, v2, v2, 0.0));
}

// Remark-4 closed form for rho_1^{1,1}
inline double rho_k1_closed_form(double hurst, long j) {
    const double h2 = 2.0 * hurst;
    return 0.5 * (std::pow(std::fabs(double(j) + 1.0), h2) - 2.0 * std::pow(std::fabs(double(j)), h2) +
                  std::pow(std::fabs(double(j) - 1.0), h2));
}

struct FbmFilterCorr {
    double hurst = 0.5;
    int k = 1;
    long max_lag = 0;
    std::map<std::tuple<int, int, long>, double> table;

    double at(int v1, int v2, long j) const {
        auto it = table.find({v1, v2, j});
        if (it == table.end()) throw ValidationError("lag outside the tabulated range");
        return it->second;
    }
};

inline FbmFilterCorr fbm_filter_corr(double hurst, int k, long max_lag) {
    FbmFilterCorr out;
    out.hurst = hurst;
    out.k = k;
    out.max_lag = max_lag;
    for (int v1 : {1, 2})
        for (int v2 : {1, 2})
            for (long j = -max_lag; j <= max_lag; ++j)
                out.table[{v1, v2, j}] = rho(hurst, k, v1, v2, j);
    return out;
}

struct LambdaMatrix {
    double l11 = 2.0, l12 = 2.0, l22 = 2.0;
    double hurst = 0.5;
    int k = 1;
    long truncation_j = 0;
    double tail_bound = 0.0;
    bool clamped = false;     // set by the plug-in variant
    bool certified = true;    // tail bound met the requested tolerance

    std::array<std::array<double, 2>, 2> entries() const { return {{{l11, l12}, {l12, l22}}}; }
    // (-1,1) Lambda (-1,1)^T, the quadratic form of the ratio statistic
    double ratio_form() const { return l11 - 2.0 * l12 + l22; }
};

namespace detail {

struct LambdaSeriesResult {
    double value;
    long truncation_j;
    double tail_bound;
    bool certified;
};

// lambda^k_{v1,v2} = 2 sum_{j in Z} rho_k^{v1,v2}(j)^2. On the diagonal
// rho(0) = 1 and this is the series 2 (1 + sum_{j != 0} rho^2); the j = 0
// term of the off-diagonal entry is rho^{1,2}(0)^2. Truncation is certified
// by fitting the |j|^{4(H-k)} decay over the last decade of computed terms
// and bounding the remainder by the comparison integral.
inline LambdaSeriesResult lambda_series(double hurst, int k, int v1, int v2, double rel_tol,
                                        long max_terms) {
    const double decay = 4.0 * (hurst - double(k)); // rho(j)^2 ~ C |j|^decay
    double partial = rho(hurst, k, v1, v2, 0);
    partial *= partial;
    long J = 64;
    double sum = partial;
    long j = 1;
    auto add_upto = [&](long hi) {
        for (; j <= hi; ++j) {
            const double rp = rho(hurst, k, v1, v2, j);
            const double rm = rho(hurst, k, v1, v2, -j);
            sum += rp * rp + rm * rm;
        }
    };
    while (true) {
        add_upto(J);
        // fit the decay constant over the last decade on both sides
        double c_fit = 0.0;
        for (long q = std::max<long>(2, J / 10); q <= J; q += std::max<long>(1, J / 20)) {
            const double rp = rho(hurst, k, v1, v2, q);
            const double rm = rho(hurst, k, v1, v2, -q);
            const double scale = std::pow(double(q), -decay);
            c_fit = std::max({c_fit, rp * rp * scale, rm * rm * scale});
        }
        double tail = kInf;
        if (decay < -1.0)
            tail = 2.0 * c_fit * std::pow(double(J), decay + 1.0) / (-(decay + 1.0));
        if (tail <= rel_tol * sum) return {2.0 * sum, J, 2.0 * tail, true};
        if (2 * J > max_terms) return {2.0 * sum, J, 2.0 * tail, false};
        J *= 2;
    }
}

} // namespace detail

// Asymptotic covariance of the two-frequency scaled QV pair. Defined for
// k >= 2 on all of H in (0,1), and for k = 1 only when H < 3/4 (Breuer-Major
// summability boundary).
inline LambdaMatrix lambda_matrix(double hurst, int k, double rel_tol = 1e-8,
                                  long max_terms = (1L << 24), bool throw_on_failure = true) {
    if (!(hurst > 0.0) || !(hurst < 1.0))
        throw ValidationError("Hurst parameter must lie in (0,1)");
    if (k < 1) throw ValidationError("filter order must be >= 1");
    if (k == 1 && hurst >= 0.75)
        throw ValidationError("the k=1 series diverges for H >= 3/4; use k >= 2");
    LambdaMatrix out;
    out.hurst = hurst;
    out.k = k;
    auto s11 = detail::lambda_series(hurst, k, 1, 1, rel_tol, max_terms);
    auto s22 = detail::lambda_series(hurst, k, 2, 2, rel_tol, max_terms);
    auto s12 = detail::lambda_series(hurst, k, 1, 2, rel_tol, max_terms);
    out.l11 = s11.value;
    out.l22 = s22.value;
    out.l12 = s12.value;
    out.truncation_j = std::max({s11.truncation_j, s22.truncation_j, s12.truncation_j});
    out.tail_bound = s11.tail_bound + s22.tail_bound + s12.tail_bound;
    out.certified = s11.certified && s22.certified && s12.certified;
    if (!out.certified && throw_on_failure)
        throw NumericalError("lambda_matrix", "series tail could not be certified within the term budget");
    return out;
}

// Plug-in variant: clamps an estimated alpha into the admissible range for
// the chosen filter order, sets H = alpha + 1/2 and never throws on slow
// tail convergence near the k=1 boundary (the result carries truncation_j
// and tail_bound for the caller to inspect).
inline LambdaMatrix lambda_matrix_at_alpha_hat(double alpha_hat, int k, double rel_tol = 1e-8) {
    const double lo = -0.49;
    const double hi = (k == 1) ? 0.24 : 0.49;
    double a = alpha_hat;
    bool clamped = false;
    if (!(a >= lo)) {
        a = lo;
        clamped = true;
    }
    if (!(a <= hi)) {
        a = hi;
        clamped = true;
    }
    auto out = lambda_matrix(a + 0.5, k, rel_tol, 1L << 22, /*throw_on_failure=*/false);
    out.clamped = clamped;
    return out;
}

} // namespace bss
