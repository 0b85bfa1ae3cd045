#pragma once

// Deterministic limit objects of the high-frequency theory: the functions
// h_j and their L2 norms, the limit measure pi_k, the scaling constants
// tau_k(v Delta_n)^2 (exact quadrature and the asymptotic power law), the
// finite-n empirical measure, and the correlation/variogram structure of
// the Gaussian core.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "bss/common.hpp"
#include "bss/quadrature.hpp"
#include "bss/weight_model.hpp"

namespace bss {

struct LimitMeasure {
    std::vector<double> support;     // theta_i, i in the active set
    std::vector<double> weights;     // normalized ||h_i||^2, sums to 1
    std::vector<double> h_norms_sq;  // all j, including inactive (diagnostics)
    std::vector<std::size_t> active_set;
};

struct ScalingResult {
    double tau_sq_exact = 0.0;
    double tau_sq_asymptotic = 0.0;
    double delta_n = 0.0;
    int k = 1;
    int v = 1;
    double quadrature_error_estimate = 0.0;
};

struct CovarianceKernel {
    double g_norm_sq = 0.0;
    std::vector<double> t_grid;
    std::vector<double> r_values;

    // linear interpolation on the tabulated grid
    double r(double t) const {
        if (t_grid.empty()) throw NumericalError("covariance_kernel", "empty grid");
        if (t < t_grid.front() - 1e-12 || t > t_grid.back() + 1e-12)
            throw NumericalError("covariance_kernel",
                                 "correlation queried outside the tabulated range");
        if (t <= t_grid.front()) return r_values.front();
        if (t >= t_grid.back()) return r_values.back();
        const auto it = std::upper_bound(t_grid.begin(), t_grid.end(), t);
        const std::size_t hi = static_cast<std::size_t>(it - t_grid.begin());
        const std::size_t lo = hi - 1;
        const double w = (t - t_grid[lo]) / (t_grid[hi] - t_grid[lo]);
        return (1.0 - w) * r_values[lo] + w * r_values[hi];
    }
    double R(double t) const { return 2.0 * g_norm_sq * (1.0 - r(t)); }
};

namespace detail {

inline double integrand_exponent(double alpha) { return alpha < 0.0 ? 2.0 * alpha : alpha; }

// ---- h functions -------------------------------------------------------

inline double h_eval(double alpha, int k, bool one_sided, double f_theta, double x) {
    double acc = 0.0;
    double sign = 1.0;
    for (int j = 0; j <= k; ++j) {
        const double t = x - double(j);
        if (one_sided) {
            if (t > 0.0) acc += sign * binomial(k, j) * std::pow(t, alpha);
        } else {
            if (t != 0.0) acc += sign * binomial(k, j) * std::pow(std::fabs(t), alpha);
        }
        sign = -sign;
    }
    return f_theta * acc;
}

// same, with the offset from integer m supplied exactly
inline double h_eval_near(double alpha, int k, bool one_sided, double f_theta, int m, double s) {
    double acc = 0.0;
    double sign = 1.0;
    for (int j = 0; j <= k; ++j) {
        const double t = double(m - j) + s;
        const double texact = (j == m) ? s : t;
        if (one_sided) {
            if (texact > 0.0) acc += sign * binomial(k, j) * std::pow(texact, alpha);
        } else {
            if (texact != 0.0) acc += sign * binomial(k, j) * std::pow(std::fabs(texact), alpha);
        }
        sign = -sign;
    }
    return f_theta * acc;
}

// Coefficients of the large-|x| expansion h(x) = x^alpha sum_{m>=k} d_m x^-m
// (right side; the left side of the two-sided h drops the (-1)^m factor).
// T_m = sum_j (-1)^j C(k,j) j^m vanishes for m < k, so the series starts at
// m = k and successive terms shrink like (k/x).
inline std::vector<double> h_tail_coeffs(double alpha, int k, bool right_side, int n_terms) {
    std::vector<double> d(static_cast<std::size_t>(n_terms));
    double binom_alpha = 1.0; // binomial(alpha, m), updated incrementally
    for (int m = 0; m < n_terms; ++m) {
        if (m > 0) binom_alpha *= (alpha - double(m - 1)) / double(m);
        double tm = 0.0;
        double sign = 1.0;
        for (int j = 0; j <= k; ++j) {
            tm += sign * binomial(k, j) * std::pow(double(j), double(m));
            sign = -sign;
        }
        d[static_cast<std::size_t>(m)] = binom_alpha * tm * (right_side ? ((m % 2) ? -1.0 : 1.0) : 1.0);
    }
    return d;
}

// integral of h(x)^2 over [X, +inf) (or (-inf, -X] for the left side of a
// two-sided h), evaluated term by term from the expansion above
inline double h_tail_integral(double alpha, int k, bool right_side, double X, double rel_tol,
                              const char* label) {
    const int n_terms = 72;
    auto d = h_tail_coeffs(alpha, k, right_side, n_terms);
    double total = 0.0;
    int quiet = 0;
    for (int r = 0; r + k < n_terms - k; ++r) {
        double br = 0.0;
        for (int i = 0; i <= r; ++i) br += d[static_cast<std::size_t>(k + i)] * d[static_cast<std::size_t>(k + r - i)];
        const double e = 2.0 * (alpha - double(k)) - double(r) + 1.0;
        const double term = br * std::pow(X, e) / (-e);
        total += term;
        if (std::fabs(term) < 0.01 * rel_tol * std::fabs(total) + 1e-300) {
            if (++quiet >= 3) return total;
        } else {
            quiet = 0;
        }
    }
    throw NumericalError(label, "tail series for ||h||^2 did not settle");
}

} // namespace detail

// h_j of the limit theory: one-sided powers for j = 0, two-sided otherwise,
// scaled by f_j(theta_j).
inline double h_function(const WeightSpec& spec, std::size_t j, int k, double x) {
    if (spec.kind != WeightKind::SingularKernel)
        throw ValidationError("h functions are defined for singular kernels only");
    if (j >= spec.segments.size()) throw ValidationError("segment index out of range");
    require_filter_args(spec, k, 1);
    const auto& seg = spec.segments[j];
    return detail::h_eval(seg.alpha, k, j == 0, seg.f_coeffs[0], x);
}

// || h_j ||^2 over the real line: adaptive quadrature on the core
// [-(X), 8(k+1)] with exact-offset evaluation at the singular integers,
// plus analytic tail integrals on both sides.
inline double h_norm_sq(const WeightSpec& spec, std::size_t j, int k, double rel_tol = 1e-8) {
    if (spec.kind != WeightKind::SingularKernel)
        throw ValidationError("h norms are defined for singular kernels only");
    if (j >= spec.segments.size()) throw ValidationError("segment index out of range");
    require_filter_args(spec, k, 1);
    if (!(rel_tol > 0.0) || rel_tol > 1e-4)
        throw ValidationError("h_norm_sq relative tolerance must lie in (0, 1e-4]");
    const auto& seg = spec.segments[j];
    const double alpha = seg.alpha;
    const double f0 = seg.f_coeffs[0];
    const bool one_sided = (j == 0);
    const double X = 8.0 * double(k + 1);

    auto f = [alpha, k, one_sided](double x) {
        const double v = detail::h_eval(alpha, k, one_sided, 1.0, x);
        return v * v;
    };
    std::vector<quad::Breakpoint> bps;
    for (int m = 0; m <= k; ++m) {
        bps.push_back({double(m), detail::integrand_exponent(alpha),
                       [alpha, k, one_sided, m](double s) {
                           const double v = detail::h_eval_near(alpha, k, one_sided, 1.0, m, s);
                           return v * v;
                       }});
    }
    quad::Options opt;
    opt.rel_tol = 0.5 * rel_tol;
    opt.label = "h_norm_sq";
    const double lo = one_sided ? 0.0 : -X;
    auto core = quad::integrate(f, lo, X, bps, opt);
    double total = core.value;
    total += detail::h_tail_integral(alpha, k, true, X, rel_tol, "h_norm_sq");
    if (!one_sided) total += detail::h_tail_integral(alpha, k, false, X, rel_tol, "h_norm_sq");
    return f0 * f0 * total;
}

// Proposition-level limit measure: support on the active-set singularities,
// weights proportional to ||h_i||^2.
inline LimitMeasure pi_k(const WeightSpec& spec, int k, double rel_tol = 1e-8) {
    throw_if_invalid(spec);
    auto summary = summarize_smoothness(spec);
    LimitMeasure out;
    out.active_set = summary.active_set;
    double denom = 0.0;
    for (std::size_t j = 0; j < spec.segments.size(); ++j)
        out.h_norms_sq.push_back(h_norm_sq(spec, j, k, rel_tol));
    for (std::size_t i : summary.active_set) denom += out.h_norms_sq[i];
    for (std::size_t i : summary.active_set) {
        out.support.push_back(spec.segments[i].theta);
        out.weights.push_back(out.h_norms_sq[i] / denom);
    }
    return out;
}

namespace detail {

// Breakpoints (with exact-offset local evaluators) for the squared filtered
// kernel D(x)^2 where D(x) = sum_j (-1)^j C(k,j) g(x - shift_j) and the
// shifts are shift_j = v*j*delta (backward, tau) or v*(j-k)*delta (forward,
// empirical measure). Singular points: theta_i + shift_j for every segment
// and term.
inline std::vector<quad::Breakpoint> filtered_sq_breakpoints(const WeightSpec& spec, int k, int v,
                                                             double delta, bool forward) {
    std::vector<quad::Breakpoint> bps;
    auto shift_of = [k, v, delta, forward](int j) {
        return forward ? -double(v) * double(k - j) * delta : double(v) * double(j) * delta;
    };
    const auto weights = filter_weights(k);
    if (spec.kind == WeightKind::IndicatorSum) {
        for (const auto& p : kernel_points(spec))
            for (int j = 0; j <= k; ++j) bps.push_back({p.x + shift_of(j), 0.0});
        return bps;
    }
    for (const auto& p : kernel_points(spec)) {
        if (p.exponent == 0.0) {
            for (int j = 0; j <= k; ++j) bps.push_back({p.x + shift_of(j), 0.0});
            continue;
        }
        std::size_t seg = 0;
        for (std::size_t i = 0; i < spec.segments.size(); ++i)
            if (spec.segments[i].theta == p.x) seg = i;
        for (int m = 0; m <= k; ++m) {
            const double x_star = p.x + shift_of(m);
            auto local = [&spec, seg, m, k, weights, shift_of](double s) {
                double acc = 0.0;
                for (int j = 0; j <= k; ++j) {
                    const double w = weights[static_cast<std::size_t>(j)];
                    if (j == m) acc += w * eval_g_near(spec, seg, s);
                    else
                        acc += w * eval_g(spec, spec.segments[seg].theta +
                                                    (shift_of(m) - shift_of(j)) + s);
                }
                return acc * acc;
            };
            bps.push_back({x_star, integrand_exponent(p.exponent), std::move(local)});
        }
    }
    return bps;
}

struct FilteredSqIntegral {
    double value;
    double error;
};

inline FilteredSqIntegral integrate_filtered_sq(const WeightSpec& spec, int k, int v, double delta,
                                                bool forward, double lo, double hi, double rel_tol,
                                                const char* label) {
    const auto weights = filter_weights(k);
    auto shift_of = [k, v, delta, forward](int j) {
        return forward ? -double(v) * double(k - j) * delta : double(v) * double(j) * delta;
    };
    auto D = [&spec, k, weights, shift_of](double x) {
        double acc = 0.0;
        for (int j = 0; j <= k; ++j)
            acc += weights[static_cast<std::size_t>(j)] * eval_g(spec, x - shift_of(j));
        return acc * acc;
    };
    auto bps = filtered_sq_breakpoints(spec, k, v, delta, forward);
    quad::Options opt;
    opt.rel_tol = rel_tol;
    opt.label = label;
    const double support_end = kernel_tail_start(spec) + (forward ? 0.0 : double(v) * double(k) * delta);
    FilteredSqIntegral out{0.0, 0.0};
    const double core_hi = std::min(hi, support_end);
    if (core_hi > lo) {
        auto r = quad::integrate(D, lo, core_hi, bps, opt);
        out.value += r.value;
        out.error += r.error_estimate;
    }
    if (hi > support_end && spec.kind == WeightKind::SingularKernel) {
        // beyond the kernel's structural support every term is the
        // exponential baseline
        if (hi == kInf) {
            auto r = quad::integrate_exp_tail(D, std::max(lo, support_end), 2.0 * spec.tail_rate,
                                              {}, opt);
            out.value += r.value;
            out.error += r.error_estimate;
        } else {
            auto r = quad::integrate(D, std::max(lo, support_end), hi, {}, opt);
            out.value += r.value;
            out.error += r.error_estimate;
        }
    }
    return out;
}

} // namespace detail

// tau_k(v Delta_n)^2 by singularity-aware quadrature of the filtered kernel,
// together with the asymptotic power law (v Delta)^{2 alpha + 1} sum ||h_j||^2
// over the active set.
inline ScalingResult tau_sq(const WeightSpec& spec, int k, int v, double delta_n,
                            double rel_tol = 1e-8) {
    require_filter_args(spec, k, v);
    if (!(delta_n > 0.0)) throw ValidationError("delta_n must be positive");
    ScalingResult out;
    out.delta_n = delta_n;
    out.k = k;
    out.v = v;
    if (spec.kind == WeightKind::SingularKernel) {
        double min_hw = kInf;
        for (const auto& s : spec.segments) min_hw = std::min(min_hw, s.half_width);
        if (!(delta_n < min_hw / (2.0 * double(k) * double(v))))
            throw ValidationError("delta_n must be below half_width / (2 k v) for the windowed mesh");
    }
    auto exact = detail::integrate_filtered_sq(spec, k, v, delta_n, false, 0.0, kInf, rel_tol,
                                               "tau_sq");
    out.tau_sq_exact = exact.value;
    out.quadrature_error_estimate = exact.error;
    if (spec.kind == WeightKind::SingularKernel) {
        auto summary = summarize_smoothness(spec);
        double hsum = 0.0;
        for (std::size_t i : summary.active_set) hsum += h_norm_sq(spec, i, k, rel_tol);
        out.tau_sq_asymptotic =
            std::pow(double(v) * delta_n, 2.0 * summary.alpha_min + 1.0) * hsum;
    } else {
        out.tau_sq_asymptotic = out.tau_sq_exact; // no power law for indicators
    }
    return out;
}

// Empirical measure pi_{n,k}^v([a,b]): mass of the normalized squared filtered
// kernel. The integrand is anchored forward (the k-th difference spanning
// [x, x + vk Delta]), which reproduces the classical finite-n formulas; the
// normalization equals tau^2 either way.
inline double pi_n_measure(const WeightSpec& spec, int k, int v, double delta_n, double a, double b,
                           double rel_tol = 1e-8) {
    require_filter_args(spec, k, v);
    if (!(a < b)) throw ValidationError("pi_n_measure needs an interval with a < b");
    if (spec.kind == WeightKind::SingularKernel) {
        double min_hw = kInf;
        for (const auto& s : spec.segments) min_hw = std::min(min_hw, s.half_width);
        if (!(delta_n < min_hw / (2.0 * double(k) * double(v))))
            throw ValidationError("delta_n must be below half_width / (2 k v) for the windowed mesh");
    }
    const double lo_support = -double(v) * double(k) * delta_n;
    auto denom = detail::integrate_filtered_sq(spec, k, v, delta_n, true, lo_support, kInf, rel_tol,
                                               "pi_n_measure");
    const double lo = std::max(a, lo_support);
    const double hi = b;
    double num = 0.0;
    if (hi > lo) num = detail::integrate_filtered_sq(spec, k, v, delta_n, true, lo, hi, rel_tol,
                                                     "pi_n_measure")
                          .value;
    return std::clamp(num / denom.value, 0.0, 1.0);
}

// Correlation kernel r(t) = int g(u) g(u+t) du / ||g||^2 tabulated on a grid,
// plus the variogram via R(t) = 2 ||g||^2 (1 - r(t)).
inline CovarianceKernel covariance_kernel(const WeightSpec& spec, std::vector<double> t_grid,
                                          double rel_tol = 1e-8) {
    if (t_grid.empty()) throw ValidationError("covariance_kernel needs a non-empty grid");
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (t_grid[i] < 0.0) throw ValidationError("covariance grid times must be nonnegative");
        if (i > 0 && t_grid[i] <= t_grid[i - 1])
            throw ValidationError("covariance grid must be strictly increasing");
    }
    const double tail_start = kernel_tail_start(spec);
    const bool indicator = spec.kind == WeightKind::IndicatorSum;

    struct SingularPoint {
        double x;
        double alpha;
        std::size_t seg;
    };
    std::vector<SingularPoint> sing;
    std::vector<double> plain;
    for (const auto& p : kernel_points(spec)) {
        if (p.exponent == 0.0) {
            plain.push_back(p.x);
        } else {
            std::size_t seg = 0;
            for (std::size_t i = 0; i < spec.segments.size(); ++i)
                if (spec.segments[i].theta == p.x) seg = i;
            sing.push_back({p.x, p.exponent, seg});
        }
    }

    CovarianceKernel out;
    out.t_grid = std::move(t_grid);
    quad::Options opt;
    opt.rel_tol = rel_tol;
    opt.label = "covariance_kernel";

    auto integral_at = [&](double t) {
        auto f = [&spec, t](double u) { return eval_g(spec, u) * eval_g(spec, u + t); };
        std::vector<quad::Breakpoint> bps;
        for (double x : plain) {
            bps.push_back({x, 0.0});
            bps.push_back({x - t, 0.0});
        }
        const double eps = 1e-12 * std::max(1.0, tail_start);
        std::vector<bool> used(sing.size(), false);
        // coincidences: theta_i == theta_j - t makes both factors singular
        for (std::size_t i = 0; i < sing.size(); ++i) {
            for (std::size_t j = 0; j < sing.size(); ++j) {
                const double xj = sing[j].x - t;
                if (std::fabs(sing[i].x - xj) <= eps) {
                    const std::size_t si = sing[i].seg, sj = sing[j].seg;
                    bps.push_back({sing[i].x, sing[i].alpha + sing[j].alpha,
                                   [&spec, si, sj](double s) {
                                       return eval_g_near(spec, si, s) * eval_g_near(spec, sj, s);
                                   }});
                    used[i] = true;
                }
            }
        }
        for (std::size_t i = 0; i < sing.size(); ++i) {
            if (!used[i]) {
                const std::size_t si = sing[i].seg;
                const double xi = sing[i].x;
                bps.push_back({xi, sing[i].alpha, [&spec, si, t, xi](double s) {
                                   return eval_g_near(spec, si, s) * eval_g(spec, xi + t + s);
                               }});
            }
            // the second factor's singularity, shifted to u = theta_j - t
            bool coincided = false;
            for (std::size_t m = 0; m < sing.size(); ++m)
                if (std::fabs(sing[m].x - (sing[i].x - t)) <= eps) coincided = true;
            if (!coincided && sing[i].x - t > 0.0) {
                const std::size_t sj = sing[i].seg;
                const double us = sing[i].x - t;
                bps.push_back({us, sing[i].alpha, [&spec, sj, us](double s) {
                                   return eval_g(spec, us + s) * eval_g_near(spec, sj, s);
                               }});
            }
        }
        double value = 0.0;
        if (indicator) {
            double hi = tail_start;
            value = quad::integrate(f, 0.0, hi, bps, opt).value;
        } else {
            value = quad::integrate(f, 0.0, tail_start, bps, opt).value;
            value += quad::integrate_exp_tail(f, tail_start, 2.0 * spec.tail_rate, {}, opt).value;
        }
        return value;
    };

    out.g_norm_sq = integral_at(0.0);
    if (!(out.g_norm_sq > 0.0))
        throw NumericalError("covariance_kernel", "||g||^2 is not positive");
    auto r_at = [&](double t) { return t == 0.0 ? 1.0 : integral_at(t) / out.g_norm_sq; };
    out.r_values.reserve(out.t_grid.size());
    for (double t : out.t_grid) out.r_values.push_back(r_at(t));

    // The caller's nodes stay; the table is refined between them until linear
    // interpolation meets the tolerance. r is only Holder-smooth at the kink
    // lags (0, theta_i, theta_i - theta_j for singular kernels; interval
    // endpoints and their differences for indicators), where the refinement
    // depth is capped: the residual kink error there is intrinsic, not a sign
    // of an under-resolved grid.
    std::vector<double> kinks{0.0};
    if (spec.kind == WeightKind::SingularKernel) {
        for (const auto& s : spec.segments) kinks.push_back(s.theta);
        for (const auto& s1 : spec.segments)
            for (const auto& s2 : spec.segments)
                if (s1.theta > s2.theta) kinks.push_back(s1.theta - s2.theta);
    } else {
        std::vector<double> edges;
        for (const auto& term : spec.indicator_terms) {
            edges.push_back(term.lower);
            edges.push_back(term.upper);
        }
        for (double e1 : edges)
            for (double e2 : edges)
                if (e1 - e2 >= 0.0) kinks.push_back(e1 - e2);
    }
    const double interp_tol = std::max(rel_tol, 1e-10) * 10.0;
    struct Node {
        double t, r;
    };
    std::vector<Node> table;
    table.reserve(out.t_grid.size());
    for (std::size_t i = 0; i < out.t_grid.size(); ++i) table.push_back({out.t_grid[i], out.r_values[i]});
    auto touches_kink = [&kinks](double lo, double hi) {
        for (double kk : kinks)
            if (kk >= lo - 1e-12 && kk <= hi + 1e-12) return true;
        return false;
    };
    // Curvature screen on the tabulated nodes decides which gaps get probed;
    // a global probe budget keeps the refinement cheap on dense grids.
    int probes_left = 240;
    {
        std::vector<Node> refined;
        for (std::size_t i = 0; i < table.size(); ++i) {
            refined.push_back(table[i]);
            if (i + 1 == table.size()) break;
            bool suspicious = true;
            if (i > 0 && i + 2 < table.size()) {
                const double h1 = table[i].t - table[i - 1].t;
                const double h2 = table[i + 1].t - table[i].t;
                const double second = (table[i + 1].r - table[i].r) / h2 -
                                      (table[i].r - table[i - 1].r) / h1;
                suspicious = 0.125 * std::fabs(second) * std::max(h1, h2) > 0.25 * interp_tol;
            }
            if (!suspicious || probes_left <= 0) continue;
            struct Seg {
                Node a, b;
                int depth;
            };
            std::vector<Seg> stack{{table[i], table[i + 1], 0}};
            std::vector<Node> inserted;
            while (!stack.empty() && probes_left > 0) {
                Seg s = stack.back();
                stack.pop_back();
                const double tm = 0.5 * (s.a.t + s.b.t);
                const double rm = r_at(tm);
                --probes_left;
                const double err = std::fabs(rm - 0.5 * (s.a.r + s.b.r));
                const bool kinky = touches_kink(s.a.t, s.b.t);
                if (err > interp_tol) {
                    inserted.push_back({tm, rm});
                    const int max_depth = kinky ? 12 : 24;
                    if (s.depth >= max_depth) {
                        if (!kinky)
                            throw NumericalError(
                                "covariance_kernel",
                                "linear interpolation tolerance unreachable between grid nodes");
                        continue; // intrinsic kink error, keep the midpoint and move on
                    }
                    stack.push_back({s.a, {tm, rm}, s.depth + 1});
                    stack.push_back({{tm, rm}, s.b, s.depth + 1});
                }
            }
            std::sort(inserted.begin(), inserted.end(),
                      [](const Node& a, const Node& b) { return a.t < b.t; });
            for (const auto& n : inserted) refined.push_back(n);
        }
        table = std::move(refined);
    }
    // keep the caller-facing grid view, interpolate on the refined table
    std::vector<double> tg, rv;
    tg.reserve(table.size());
    rv.reserve(table.size());
    for (const auto& n : table) {
        tg.push_back(n.t);
        rv.push_back(n.r);
    }
    out.t_grid = std::move(tg);
    out.r_values = std::move(rv);
    return out;
}

} // namespace bss
